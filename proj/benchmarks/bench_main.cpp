#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "product_ensemble/kernel_engine.hpp"
#include "product_ensemble/monte_carlo.hpp"
#include "product_ensemble/special_functions.hpp"

namespace {

void BM_LogGamma(benchmark::State& state) {
  pe::Complex z(0.3, 20.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pe::log_gamma(z));
    z += pe::Complex(1e-9, 0.0);
  }
}
BENCHMARK(BM_LogGamma);

void BM_WeightW(benchmark::State& state) {
  const pe::WeightSpec spec{static_cast<int>(state.range(0)), std::vector<int>(static_cast<std::size_t>(state.range(0)), 0), 0};
  for (auto _ : state) benchmark::DoNotOptimize(pe::weight_w(spec, 1.3));
}
BENCHMARK(BM_WeightW)->Arg(1)->Arg(2)->Arg(3);

void BM_KernelFiniteN(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const pe::ModelSpec s = pe::ModelSpec::ginibre(n, 2);
  const pe::BulkPoint bp = pe::bulk_point(s, std::numbers::pi / 6);
  const double x = n * n * bp.x0;
  for (auto _ : state) benchmark::DoNotOptimize(pe::kernel_finite_n(s, x, x * 1.001).value);
}
BENCHMARK(BM_KernelFiniteN)->Arg(5)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_RescaledBulkGrid(benchmark::State& state) {
  const pe::ModelSpec s = pe::ModelSpec::ginibre(static_cast<int>(state.range(0)), 2);
  const pe::ScalingFrame f = pe::bulk_frame(s, std::numbers::pi / 6);
  std::vector<double> xs;
  for (int i = 0; i < 9; ++i) xs.push_back(-2.0 + 0.5 * i);
  for (auto _ : state) benchmark::DoNotOptimize(pe::rescaled_kernel_grid(s, f, xs, xs));
}
BENCHMARK(BM_RescaledBulkGrid)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SampleBatch(benchmark::State& state) {
  const pe::ModelSpec s = pe::ModelSpec::ginibre(static_cast<int>(state.range(0)), 2);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pe::sample_batch(s, 4, seed++));
}
BENCHMARK(BM_SampleBatch)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
