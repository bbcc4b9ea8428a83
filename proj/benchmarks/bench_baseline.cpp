#include <benchmark/benchmark.h>

#include "flowmap/reconstruct.hpp"

namespace {

using namespace flowmap;

void BM_Triangulate(benchmark::State& state) {
  const auto pts = sobol(2, static_cast<std::size_t>(state.range(0)), DoubleGyre{}.domain()).points;
  for (auto _ : state) benchmark::DoNotOptimize(triangulate(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Triangulate)->Arg(1024)->Arg(8192)->Arg(65536)->Unit(benchmark::kMillisecond);

// Barycentric reconstruction of range(0) query seeds from a 128x64 lattice
// basis with 20 file cycles.
void BM_BarycentricQuery(benchmark::State& state) {
  TraceConfig cfg;
  cfg.file_cycles = 20;
  const auto basis = extract_long(DoubleGyre{}, uniform_grid(std::array{128, 64}, DoubleGyre{}.domain()), cfg);
  const auto tri = triangulate(basis.seeds);
  const auto queries = pseudorandom(2, static_cast<std::size_t>(state.range(0)), DoubleGyre{}.domain(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(bc_reconstruct_all(basis, tri, queries.points));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BarycentricQuery)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LatticeQuery(benchmark::State& state) {
  TraceConfig cfg;
  cfg.file_cycles = 20;
  const auto basis = extract_long(DoubleGyre{}, uniform_grid(std::array{128, 64}, DoubleGyre{}.domain()), cfg);
  const auto lattice = detect_lattice(basis.seeds);
  const auto queries = pseudorandom(2, static_cast<std::size_t>(state.range(0)), DoubleGyre{}.domain(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(lattice_reconstruct_all(basis, *lattice, queries.points));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LatticeQuery)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
