// Serial reference kernels against their OpenMP counterparts. Both produce
// bit-identical results, so the ratio is pure parallel speed-up. Thread
// count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <array>

#include "aerialfl/montecarlo.hpp"

using namespace aerialfl;

namespace {

NetworkParams reference()
{
    NetworkParams p;
    p.height = 45.0;
    return p;
}

void BM_CoverageSerial(benchmark::State& state)
{
    const auto p = reference();
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_coverage_serial(p, state.range(0), 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CoverageOpenMP(benchmark::State& state)
{
    const auto p = reference();
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_coverage(p, state.range(0), 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = omp_get_max_threads();
}

constexpr std::array<double, 4> kArguments{1e5, 1e6, 1e7, 1e8};

void BM_LaplaceSerial(benchmark::State& state)
{
    const auto p = reference();
    for (auto _ : state) {
        benchmark::DoNotOptimize(laplace_oracle_serial(p, Direction::Downlink, kArguments, state.range(0), 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LaplaceOpenMP(benchmark::State& state)
{
    const auto p = reference();
    for (auto _ : state) {
        benchmark::DoNotOptimize(laplace_oracle(p, Direction::Downlink, kArguments, state.range(0), 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = omp_get_max_threads();
}

} // namespace

BENCHMARK(BM_CoverageSerial)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageOpenMP)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LaplaceSerial)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LaplaceOpenMP)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
