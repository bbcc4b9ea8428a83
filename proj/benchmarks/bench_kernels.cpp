#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "kernels.hpp"

namespace {

std::vector<double> random_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Rows x width x width with bias: one hidden decoder layer.
void BM_Gemm(benchmark::State& state) {
  const auto M = static_cast<std::size_t>(state.range(0));
  const auto D = static_cast<std::size_t>(state.range(1));
  const auto A = random_matrix(M * D, 1), B = random_matrix(D * D, 2), bias = random_matrix(D, 3);
  std::vector<double> C(M * D);
  for (auto _ : state) {
    flowmap::kernels::gemm(M, D, D, A.data(), B.data(), bias.data(), C.data());
    benchmark::DoNotOptimize(C.data());
  }
  state.counters["GFLOPS"] = benchmark::Counter(2.0 * static_cast<double>(M * D * D),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Gemm)->ArgsProduct({{1024, 8192}, {64, 128, 256}});

// Weight gradient shape: A^T B over the batch.
void BM_GemmTN(benchmark::State& state) {
  const auto M = static_cast<std::size_t>(state.range(0));
  const auto D = static_cast<std::size_t>(state.range(1));
  const auto A = random_matrix(M * D, 1), B = random_matrix(M * D, 2);
  std::vector<double> C(D * D);
  for (auto _ : state) {
    flowmap::kernels::gemm_tn(D, D, M, A.data(), B.data(), C.data());
    benchmark::DoNotOptimize(C.data());
  }
  state.counters["GFLOPS"] = benchmark::Counter(2.0 * static_cast<double>(M * D * D),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmTN)->ArgsProduct({{1024}, {64, 256}});

}  // namespace

BENCHMARK_MAIN();
