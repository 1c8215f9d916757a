#include "vineport/portfolio.hpp"
#include "vineport/rng.hpp"

#include <benchmark/benchmark.h>

using namespace vineport;

namespace {

Eigen::MatrixXd scenarios(Eigen::Index S, Eigen::Index d) {
    Rng rng(1);
    Eigen::MatrixXd r(S, d);
    for (Eigen::Index i = 0; i < S; ++i) {
        const double m = rng.normal();
        for (Eigen::Index j = 0; j < d; ++j) r(i, j) = 0.01 * static_cast<double>(j) + (1 + 0.1 * static_cast<double>(j)) * (0.6 * m + 0.8 * rng.normal());
    }
    return r;
}

void BM_MinCvar(benchmark::State& state) {
    const auto r = scenarios(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(min_cvar(r, 0.10));
}
BENCHMARK(BM_MinCvar)->Args({2000, 4})->Args({10000, 4})->Args({10000, 12})->Unit(benchmark::kMillisecond);

void BM_MinVariance(benchmark::State& state) {
    const auto r = scenarios(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(min_variance(r));
}
BENCHMARK(BM_MinVariance)->Args({10000, 4})->Args({10000, 12})->Unit(benchmark::kMillisecond);

void BM_MaxSharpe(benchmark::State& state) {
    const auto r = scenarios(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(max_sharpe(r));
}
BENCHMARK(BM_MaxSharpe)->Args({10000, 4})->Args({10000, 12})->Unit(benchmark::kMillisecond);

} // namespace
