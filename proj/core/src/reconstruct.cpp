#include "flowmap/reconstruct.hpp"

#include <chrono>
#include <cmath>

#include "flowmap/error.hpp"
#include "flowmap/parallel.hpp"

namespace flowmap {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Stencil of basis rows and weights for one query location.
struct Stencil {
  std::array<std::size_t, 8> rows{};
  std::array<double, 8> weights{};
  int size = 0;
};

// Shared chaining loop: `stencil_at` returns false when the query has no stencil.
template <class StencilFn>
Trajectory reconstruct_with(const FlowMapSet& basis, const Point& seed, StencilFn&& stencil_at) {
  const int n = basis.cycle_count();
  const int len = basis.map_length();
  const auto stride = static_cast<std::size_t>(n);
  Trajectory tr;
  tr.seed = seed;
  tr.positions.assign(static_cast<std::size_t>(n), seed);
  tr.valid.assign(static_cast<std::size_t>(n), 0);
  Point query = seed;
  Stencil st;
  for (int j = 0; j < n; ++j) {
    if (j % len == 0) {
      if (j > 0) query = tr.positions[static_cast<std::size_t>(j - 1)];
      if (!stencil_at(query, st)) return tr;
    }
    Point p(basis.dim());
    for (int k = 0; k < st.size; ++k) {
      const std::size_t at = st.rows[static_cast<std::size_t>(k)] * stride + static_cast<std::size_t>(j);
      if (!basis.valid[at]) return tr;
      const Point& e = basis.ends[at];
      for (int a = 0; a < p.dim(); ++a) p[a] += st.weights[static_cast<std::size_t>(k)] * e[a];
    }
    tr.positions[static_cast<std::size_t>(j)] = p;
    tr.valid[static_cast<std::size_t>(j)] = 1;
  }
  return tr;
}

void check_basis(const FlowMapSet& basis, const Point& seed) {
  if (seed.dim() != basis.dim()) throw InvalidArgument("seed " + seed.str() + " does not match basis dimension");
}

}  // namespace

Trajectory bc_reconstruct(const FlowMapSet& basis, const Triangulation& tri, const Point& seed,
                          Locator& locator) {
  check_basis(basis, seed);
  if (basis.dim() != 2) throw InvalidArgument("barycentric reconstruction is 2D only");
  if (tri.vertices.size() != basis.seed_count())
    throw InvalidArgument("triangulation does not belong to this basis");
  return reconstruct_with(basis, seed, [&](const Point& q, Stencil& st) {
    if (!q.finite()) return false;
    const int t = locator.locate(q);
    if (t == kOutside) return false;
    const auto& T = tri.triangles[static_cast<std::size_t>(t)];
    const auto w = barycentric_weights(tri.vertices[static_cast<std::size_t>(T[0])],
                                       tri.vertices[static_cast<std::size_t>(T[1])],
                                       tri.vertices[static_cast<std::size_t>(T[2])], q);
    st.size = 3;
    for (std::size_t k = 0; k < 3; ++k) {
      st.rows[k] = static_cast<std::size_t>(T[k]);
      st.weights[k] = w[k];
    }
    return true;
  });
}

Trajectory bc_reconstruct(const FlowMapSet& basis, const Triangulation& tri, const Point& seed) {
  Locator loc(tri);
  return bc_reconstruct(basis, tri, seed, loc);
}

std::vector<Trajectory> bc_reconstruct_all(const FlowMapSet& basis, const Triangulation& tri,
                                           std::span<const Point> seeds) {
  std::vector<Trajectory> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t b, std::size_t e) {
    Locator loc(tri);
    for (std::size_t i = b; i < e; ++i) out[i] = bc_reconstruct(basis, tri, seeds[i], loc);
  }, 64);
  return out;
}

Trajectory lattice_reconstruct(const FlowMapSet& basis, const Lattice& lattice, const Point& seed) {
  check_basis(basis, seed);
  if (lattice.size() != basis.seed_count() || lattice.dim != basis.dim())
    throw InvalidArgument("lattice does not belong to this basis");
  const int dim = lattice.dim;
  for (int a = 0; a < dim; ++a)
    if (lattice.res[static_cast<std::size_t>(a)] < 2) throw InvalidArgument("lattice needs >= 2 nodes per axis");
  return reconstruct_with(basis, seed, [&](const Point& q, Stencil& st) {
    std::array<int, 3> cell{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      const auto ax = static_cast<std::size_t>(a);
      const double h = lattice.spacing[ax];
      const double u = (q[a] - lattice.origin[a]) / h;
      const int last = lattice.res[ax] - 1;
      constexpr double kSnap = 1e-9;
      if (!(u >= -kSnap && u <= last + kSnap)) return false;
      double iu = std::floor(u);
      double t = u - iu;
      if (t > 1.0 - kSnap) {
        iu += 1.0;
        t = 0.0;
      } else if (t < kSnap) {
        t = 0.0;
      }
      int i = static_cast<int>(iu);
      if (i < 0) i = 0;
      if (i >= last) {
        // On the upper face: use the last cell with weight fully on its top node.
        i = last - 1;
        t = 1.0;
      }
      cell[ax] = i;
      frac[ax] = t;
    }
    st.size = 1 << dim;
    for (int c = 0; c < st.size; ++c) {
      std::array<int, 3> idx{0, 0, 0};
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const auto ax = static_cast<std::size_t>(a);
        const int bit = (c >> a) & 1;
        idx[ax] = cell[ax] + bit;
        w *= bit ? frac[ax] : 1.0 - frac[ax];
      }
      st.rows[static_cast<std::size_t>(c)] = lattice.index(idx[0], idx[1], idx[2]);
      st.weights[static_cast<std::size_t>(c)] = w;
    }
    return true;
  });
}

std::vector<Trajectory> lattice_reconstruct_all(const FlowMapSet& basis, const Lattice& lattice,
                                                std::span<const Point> seeds) {
  std::vector<Trajectory> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = lattice_reconstruct(basis, lattice, seeds[i]);
  }, 64);
  return out;
}

BaselineRun run_baseline(const std::filesystem::path& basis_path, std::span<const Point> seeds,
                         bool prefer_lattice) {
  BaselineRun run;
  auto t0 = std::chrono::steady_clock::now();
  run.basis = read_flowmap(basis_path);
  run.timings.load_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  if (prefer_lattice || run.basis.dim() == 3) {
    run.lattice = detect_lattice(run.basis.seeds);
    if (!run.lattice) throw InvalidArgument("basis seeds do not form a lattice");
  } else {
    run.tri = triangulate(run.basis.seeds);
  }
  run.timings.triangulate_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  run.trajectories = run.tri ? bc_reconstruct_all(run.basis, *run.tri, seeds)
                             : lattice_reconstruct_all(run.basis, *run.lattice, seeds);
  run.timings.interpolate_s = seconds_since(t0);
  return run;
}

}  // namespace flowmap
