// Compares the OpenMP kernels against their serial reference
// implementations on realistically shaped inputs. Run with
// --benchmark_time_unit=ms for readable numbers.

#include <benchmark/benchmark.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stabprobe/example_correlation.hpp"
#include "stabprobe/reference.hpp"
#include "stabprobe/stats.hpp"
#include "stabprobe/synth.hpp"

namespace {

using namespace stabprobe;

PredictionTensor correlation_input(std::size_t n_examples, std::size_t runs,
                                   std::size_t checkpoints) {
  BlockModelSpec spec;
  spec.n_examples = n_examples;
  spec.block_sizes.assign(n_examples / 10, 10);
  spec.n_runs = runs;
  spec.n_checkpoints = checkpoints;
  spec.block_base_rate = 0.5;
  spec.flip_noise = 0.1;
  spec.rng_seed = 42;
  return generate(spec);
}

void set_threads(bool parallel) {
#ifdef _OPENMP
  omp_set_num_threads(parallel ? omp_get_num_procs() : 1);
#else
  (void)parallel;
#endif
}

void BM_example_correlation_parallel(benchmark::State& state) {
  const auto tensor = correlation_input(static_cast<std::size_t>(state.range(0)), 10, 12);
  set_threads(true);
  for (auto _ : state) {
    auto m = example_correlation_matrix(tensor);
    benchmark::DoNotOptimize(m.values.data());
  }
}

void BM_example_correlation_reference(benchmark::State& state) {
  const auto tensor = correlation_input(static_cast<std::size_t>(state.range(0)), 10, 12);
  set_threads(false);
  for (auto _ : state) {
    auto m = reference::example_correlation_matrix(tensor);
    benchmark::DoNotOptimize(m.values.data());
  }
}

void BM_decompose_fast(benchmark::State& state) {
  const auto tensor = correlation_input(static_cast<std::size_t>(state.range(0)), 10, 1);
  const auto slice = final_slice(tensor);
  set_threads(true);
  for (auto _ : state) {
    auto d = decompose_variance(slice, CovPath::fast);
    benchmark::DoNotOptimize(d.total_var);
  }
}

void BM_decompose_pairwise(benchmark::State& state) {
  const auto tensor = correlation_input(static_cast<std::size_t>(state.range(0)), 10, 1);
  const auto slice = final_slice(tensor);
  set_threads(true);
  for (auto _ : state) {
    auto d = decompose_variance(slice, CovPath::pairwise);
    benchmark::DoNotOptimize(d.total_var);
  }
}

void BM_decompose_reference(benchmark::State& state) {
  const auto tensor = correlation_input(static_cast<std::size_t>(state.range(0)), 10, 1);
  const auto slice = final_slice(tensor);
  set_threads(false);
  for (auto _ : state) {
    auto d = reference::decompose_variance(slice);
    benchmark::DoNotOptimize(d.total_var);
  }
}

void BM_top_pairs(benchmark::State& state) {
  const auto tensor = correlation_input(static_cast<std::size_t>(state.range(0)), 10, 1);
  const auto slice = final_slice(tensor);
  set_threads(true);
  for (auto _ : state) {
    auto pairs = top_covariance_pairs(slice, 10);
    benchmark::DoNotOptimize(pairs.data());
  }
}

}  // namespace

BENCHMARK(BM_example_correlation_parallel)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_example_correlation_reference)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decompose_fast)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decompose_pairwise)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decompose_reference)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_top_pairs)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
