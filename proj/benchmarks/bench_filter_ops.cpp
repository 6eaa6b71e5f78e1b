#include <benchmark/benchmark.h>

#include "ncasp/filter_ops.hpp"
#include "bench_common.hpp"

using namespace ncasp;

static void InstantiateDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const ShiftSet shifts = bench::random_shift_set(n, 2, rng);
  const NcPolynomial p = bench::dense_filter(2, 2, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(instantiate(p, shifts).matrix);
  }
  state.SetComplexityN(n);
}
BENCHMARK(InstantiateDense)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void ApplyStreaming(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const ShiftSet shifts = bench::random_shift_set(n, 2, rng);
  const NcPolynomial p = bench::dense_filter(2, 2, rng);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.gaussian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_streaming(p, shifts, x));
  }
  state.SetComplexityN(n);
}
BENCHMARK(ApplyStreaming)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void ApplyMaterialized(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const ShiftSet shifts = bench::random_shift_set(n, 2, rng);
  const NcPolynomial p = bench::dense_filter(2, 2, rng);
  const FilterOperator f = instantiate(p, shifts);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.gaussian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply(f, x));
  }
  state.SetComplexityN(n);
}
BENCHMARK(ApplyMaterialized)->RangeMultiplier(2)->Range(16, 256)->Complexity();
