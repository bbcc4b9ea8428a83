#include <benchmark/benchmark.h>

#include "flowmap/flowmap.hpp"

namespace {

using namespace flowmap;

void BM_RK4Step(benchmark::State& state) {
  const DoubleGyre dg;
  Point p{1.2, 0.3};
  double t = 0.0;
  for (auto _ : state) {
    p = rk4_step(dg, p, t, 1e-6);
    t += 1e-6;
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_RK4Step);

void BM_ExtractLong(benchmark::State& state) {
  TraceConfig cfg;
  cfg.file_cycles = static_cast<int>(state.range(1));
  const auto seeds = sobol(2, static_cast<std::size_t>(state.range(0)), DoubleGyre{}.domain());
  for (auto _ : state) benchmark::DoNotOptimize(extract_long(DoubleGyre{}, seeds, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) * cfg.interval);
}
BENCHMARK(BM_ExtractLong)->Args({4096, 20})->Args({4096, 100})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
