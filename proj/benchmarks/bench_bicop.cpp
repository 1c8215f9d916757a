#include "vineport/bicop.hpp"
#include "vineport/stats.hpp"

#include <benchmark/benchmark.h>

using namespace vineport;

namespace {

const BicopSpec kSpecs[] = {{Family::Gaussian, 0, {0.5, 0}}, {Family::StudentT, 0, {0.5, 5}}, {Family::Clayton, 0, {2, 0}},
                            {Family::Gumbel, 0, {1.8, 0}},   {Family::Frank, 0, {4, 0}},      {Family::Joe, 0, {2, 0}},
                            {Family::BB1, 0, {0.8, 1.5}},    {Family::BB6, 0, {1.5, 1.4}},    {Family::BB7, 0, {1.6, 1.2}},
                            {Family::BB8, 0, {3, 0.8}}};

void BM_LogPdf(benchmark::State& state) {
    Bicop c(kSpecs[state.range(0)]);
    double u = 0.137, s = 0;
    for (auto _ : state) {
        s += c.log_pdf(u, 0.61);
        u = u > 0.98 ? 0.011 : u + 0.0137;
    }
    benchmark::DoNotOptimize(s);
    state.SetLabel(std::string(family_name(c.spec().family)));
}
BENCHMARK(BM_LogPdf)->DenseRange(0, 9);

void BM_Hinv(benchmark::State& state) {
    Bicop c(kSpecs[state.range(0)]);
    double w = 0.137, s = 0;
    for (auto _ : state) {
        s += c.hinv2(w, 0.61);
        w = w > 0.98 ? 0.011 : w + 0.0137;
    }
    benchmark::DoNotOptimize(s);
    state.SetLabel(std::string(family_name(c.spec().family)));
}
BENCHMARK(BM_Hinv)->DenseRange(0, 9);

void BM_FitBicop(benchmark::State& state) {
    const BicopSpec& spec = kSpecs[state.range(0)];
    auto u = bicop_sample(500, spec, 1);
    for (auto _ : state) benchmark::DoNotOptimize(fit_bicop(stats::col(u, 0), stats::col(u, 1), spec.family));
    state.SetLabel(std::string(family_name(spec.family)));
}
BENCHMARK(BM_FitBicop)->DenseRange(0, 9)->Unit(benchmark::kMillisecond);

void BM_SelectBicop(benchmark::State& state) {
    auto u = bicop_sample(static_cast<std::size_t>(state.range(0)), kSpecs[2], 1);
    for (auto _ : state) benchmark::DoNotOptimize(select_bicop(stats::col(u, 0), stats::col(u, 1)));
}
BENCHMARK(BM_SelectBicop)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_KendallTau(benchmark::State& state) {
    auto u = bicop_sample(static_cast<std::size_t>(state.range(0)), kSpecs[0], 2);
    for (auto _ : state) benchmark::DoNotOptimize(stats::kendall_tau(stats::col(u, 0), stats::col(u, 1)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);

} // namespace
