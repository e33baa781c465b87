#include <benchmark/benchmark.h>

#include <cmath>

#include "paralab/arithmetic.hpp"
#include "paralab/fourier.hpp"

using namespace paralab;

static void BM_convolve_power(benchmark::State& state) {
    const double d = std::ldexp(1.0, -static_cast<int>(state.range(0)));
    auto m = arc_measure(d);
    for (auto _ : state) benchmark::DoNotOptimize(convolve_power(m, 2, d).values.data());
    state.SetLabel("arc n=2");
}
BENCHMARK(BM_convolve_power)->DenseRange(5, 7)->Unit(benchmark::kMillisecond);

static void BM_vinogradov_count(benchmark::State& state) {
    const double d = std::ldexp(1.0, -static_cast<int>(state.range(0)));
    auto m = lattice_parabola_measure(d, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(vinogradov_count(m, 3, d));
}
BENCHMARK(BM_vinogradov_count)->DenseRange(5, 8)->Unit(benchmark::kMillisecond);

static void BM_fourier_lp_norm(benchmark::State& state) {
    auto m = lattice_parabola_measure(0x1p-6, 0.5);
    const double R = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fourier_lp_norm(m, 6.0, R));
}
BENCHMARK(BM_fourier_lp_norm)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
