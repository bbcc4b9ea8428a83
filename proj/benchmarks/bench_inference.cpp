#include <benchmark/benchmark.h>

#include "flowmap/inference.hpp"
#include "flowmap/seeding.hpp"

namespace {

using namespace flowmap;

// Trajectories for range(0) seeds x 20 file cycles at latent width range(1).
void BM_InferTrajectories(benchmark::State& state) {
  const int latent = static_cast<int>(state.range(1));
  const auto model = init_model(MlpArch::make(2, 4, 4, 6, latent, Activation::Sine),
                                Normalization{DoubleGyre{}.domain(), 20}, 1);
  const auto seeds = pseudorandom(2, static_cast<std::size_t>(state.range(0)), DoubleGyre{}.domain(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(infer_trajectories(model, seeds.points));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_InferTrajectories)->ArgsProduct({{100, 1000}, {64, 256}})->Unit(benchmark::kMillisecond);

// Hybrid chaining: one forward pass per map.
void BM_InferHybrid(benchmark::State& state) {
  auto model = init_model(MlpArch::make(2, 4, 4, 6, 256, Activation::Sine), Normalization{DoubleGyre{}.domain(), 100}, 1);
  model.method = ExtractionMethod::Hybrid;
  model.samples_per_map = static_cast<int>(state.range(0));
  const auto seeds = pseudorandom(2, 1000, DoubleGyre{}.domain(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(infer_trajectories(model, seeds.points));
}
BENCHMARK(BM_InferHybrid)->Arg(100)->Arg(25)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
