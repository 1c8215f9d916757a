#include "vineport/synthetic.hpp"
#include "vineport/vine.hpp"

#include <benchmark/benchmark.h>

using namespace vineport;

namespace {

VineModel model(int d) {
    SyntheticSpec s;
    s.assets = d;
    return synthetic_copula(s);
}

void BM_VineSimulate(benchmark::State& state) {
    const auto m = model(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(vine_simulate(m, 10000, 1));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_VineSimulate)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_VineLoglik(benchmark::State& state) {
    const auto m = model(static_cast<int>(state.range(0)));
    const Eigen::MatrixXd u = vine_simulate(m, 1000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(vine_loglik(u, m));
}
BENCHMARK(BM_VineLoglik)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FitVine(benchmark::State& state) {
    const auto m = model(4);
    const Eigen::MatrixXd u = vine_simulate(m, 500, 3);
    const auto kind = static_cast<VineKind>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_vine(u, kind));
    state.SetLabel(std::string(vine_kind_name(kind)));
}
BENCHMARK(BM_FitVine)->DenseRange(0, 2)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_RefitParameters(benchmark::State& state) {
    const auto m = model(4);
    const Eigen::MatrixXd u = vine_simulate(m, 500, 4);
    for (auto _ : state) benchmark::DoNotOptimize(refit_parameters(u, m));
}
BENCHMARK(BM_RefitParameters)->Unit(benchmark::kMillisecond);

} // namespace
