#include "vineport/gof.hpp"
#include "vineport/rng.hpp"

#include <benchmark/benchmark.h>

using namespace vineport;

namespace {

void BM_DominanceCounts(benchmark::State& state) {
    Rng rng(1);
    Eigen::MatrixXd ref(state.range(0), 4), q(500, 4);
    for (Eigen::Index i = 0; i < ref.size(); ++i) ref.data()[i] = rng.uniform();
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = rng.uniform();
    for (auto _ : state) benchmark::DoNotOptimize(dominance_counts(ref, q));
}
BENCHMARK(BM_DominanceCounts)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_EcpTest(benchmark::State& state) {
    VineModel m = independence_vine(cvine_structure({0, 1}));
    m.specs[0][0] = {Family::Clayton, 0, {2, 0}};
    const Eigen::MatrixXd u = vine_simulate(m, 500, 2);
    for (auto _ : state) benchmark::DoNotOptimize(ecp_test(u, m, GofStatistic::CvM, {100, 10000, 3}));
}
BENCHMARK(BM_EcpTest)->Unit(benchmark::kMillisecond)->Iterations(1);

} // namespace
