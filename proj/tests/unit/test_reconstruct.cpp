#include <doctest.h>

#include <cmath>

#include "flowmap/error.hpp"
#include "flowmap/reconstruct.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace flowmap;

namespace {

const Bounds kUnit({0.0, 0.0}, {1.0, 1.0});

TraceConfig config(double step, int interval, int n, int p = 1) {
  TraceConfig c;
  c.step = step;
  c.interval = interval;
  c.file_cycles = n;
  c.samples_per_map = p;
  return c;
}

Field steady(std::function<Point(const Point&)> v, Bounds b = kUnit) {
  return GriddedField::sample(b, {5, 5, 1}, 1, 0.0, 0.0, [v](const Point& p, double) { return v(p); });
}

// Mean over cycles of mean |dx| against the fine-step Double Gyre oracle.
double dg_error(const Trajectory& tr, const TraceConfig& cfg) {
  oracle::Vec q{tr.seed[0], tr.seed[1], 0.0};
  double sum = 0.0;
  auto v = [](const oracle::Vec& x, double t) { return oracle::double_gyre(x, t); };
  const long fine = 20L * cfg.interval;
  for (int j = 0; j < cfg.file_cycles; ++j) {
    q = oracle::rk4(v, q, cfg.t0 + j * cfg.interval * cfg.step, cfg.step / 20, fine);
    REQUIRE(tr.valid[static_cast<std::size_t>(j)]);
    sum += 0.5 * (std::abs(tr.positions[static_cast<std::size_t>(j)][0] - q[0]) +
                  std::abs(tr.positions[static_cast<std::size_t>(j)][1] - q[1]));
  }
  return sum / cfg.file_cycles;
}

}  // namespace

TEST_CASE("barycentric: basis seeds reproduce their rows exactly") {
  const auto basis = extract_long(DoubleGyre{}, sobol(2, 300, DoubleGyre{}.domain()), config(0.01, 5, 12));
  const auto tri = triangulate(basis.seeds);
  for (std::size_t i = 0; i < basis.seed_count(); ++i) {
    const auto tr = bc_reconstruct(basis, tri, basis.seeds[i]);
    for (int j = 0; j < 12; ++j) REQUIRE(tr.positions[static_cast<std::size_t>(j)] == basis.end(i, j));
  }
}

TEST_CASE("barycentric: translations are reproduced exactly") {
  const Point v{0.3, -0.2};
  const auto basis = extract_long(steady([&](const Point&) { return v; }), sobol(2, 200, kUnit), config(0.01, 5, 6));
  const auto tri = triangulate(basis.seeds);
  const auto queries = pseudorandom(2, 300, Bounds({0.3, 0.4}, {0.6, 0.7}), 3);
  for (const auto& s : queries.points) {
    const auto tr = bc_reconstruct(basis, tri, s);
    for (int j = 0; j < 6; ++j) {
      REQUIRE(tr.valid[static_cast<std::size_t>(j)]);
      CHECK(std::abs(tr.positions[static_cast<std::size_t>(j)][0] - (s[0] + v[0] * 0.05 * (j + 1))) < 1e-12);
      CHECK(std::abs(tr.positions[static_cast<std::size_t>(j)][1] - (s[1] + v[1] * 0.05 * (j + 1))) < 1e-12);
    }
  }
}

TEST_CASE("barycentric: a denser basis reduces the error") {
  const auto cfg = config(0.01, 5, 20);
  const Bounds dom = DoubleGyre{}.domain();
  const auto fine = extract_long(DoubleGyre{}, uniform_grid(std::array{64, 32}, dom), cfg);
  const auto coarse = extract_long(DoubleGyre{}, uniform_grid(std::array{8, 4}, dom), cfg);
  const auto tf = triangulate(fine.seeds), tc = triangulate(coarse.seeds);
  // Inside the hull of the coarse cell centres.
  const auto test = pseudorandom(2, 100, Bounds({0.25, 0.125}, {1.75, 0.875}), 17);
  double worst_fine = 0.0, worst_coarse = 0.0;
  for (const auto& s : test.points) {
    worst_fine = std::max(worst_fine, dg_error(bc_reconstruct(fine, tf, s), cfg));
    worst_coarse = std::max(worst_coarse, dg_error(bc_reconstruct(coarse, tc, s), cfg));
  }
  CHECK(worst_fine < worst_coarse);
  CHECK(worst_fine < 0.1 * worst_coarse);
}

TEST_CASE("barycentric: outside the hull and invalid vertices") {
  const auto cfg = config(0.1, 1, 5);
  // Flow to the right leaves the unit box after a few cycles.
  const auto basis = extract_long(steady([](const Point&) { return Point{1.0, 0.0}; }), uniform_grid(std::array{6, 6}, kUnit), cfg);
  const auto tri = triangulate(basis.seeds);
  const auto out = bc_reconstruct(basis, tri, Point{0.01, 0.5});
  CHECK(out.valid == std::vector<std::uint8_t>(5, 0));
  CHECK(out.positions == std::vector<Point>(5, Point{0.01, 0.5}));
  // Near x = 0.7 the stencil includes the column at x = 0.75 that leaves first.
  const auto tr = bc_reconstruct(basis, tri, Point{0.7, 0.5});
  CHECK(tr.valid == std::vector<std::uint8_t>{1, 1, 0, 0, 0});
  CHECK_THROWS_AS(bc_reconstruct(basis, tri, Point{0.5, 0.5, 0.5}), InvalidArgument);
}

TEST_CASE("barycentric: short and hybrid bases chain through the last cycle of each map") {
  const Point v{0.1, 0.05};
  const Field f = steady([&](const Point&) { return v; });
  const auto seeds = sobol(2, 400, kUnit);
  const auto long_b = extract_long(f, seeds, config(0.02, 5, 4));
  const auto hybrid_b = extract_hybrid(f, seeds, config(0.02, 5, 4, 2));
  const auto short_b = extract_short(f, seeds, config(0.02, 5, 4));
  const auto tri = triangulate(seeds.points);
  for (const auto& s : pseudorandom(2, 50, Bounds({0.2, 0.2}, {0.5, 0.5}), 4).points) {
    const auto a = bc_reconstruct(long_b, tri, s), b = bc_reconstruct(hybrid_b, tri, s), c = bc_reconstruct(short_b, tri, s);
    for (std::size_t j = 0; j < 4; ++j)
      for (int k = 0; k < 2; ++k) {
        CHECK(b.positions[j][k] == doctest::Approx(a.positions[j][k]).epsilon(1e-12));
        CHECK(c.positions[j][k] == doctest::Approx(a.positions[j][k]).epsilon(1e-12));
      }
  }
}

TEST_CASE("barycentric: batch equals per-seed") {
  const auto basis = extract_long(DoubleGyre{}, sobol(2, 256, DoubleGyre{}.domain()), config(0.01, 5, 8));
  const auto tri = triangulate(basis.seeds);
  const auto q = pseudorandom(2, 500, DoubleGyre{}.domain(), 6);
  const auto all = bc_reconstruct_all(basis, tri, q.points);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(all[i] == bc_reconstruct(basis, tri, q.points[i]));
}

TEST_CASE("lattice: nodes, edge midpoints, linear precision") {
  const auto cfg = config(0.01, 10, 5);
  const Bounds box({-1.0, -1.0}, {1.0, 1.0});
  const Field saddle = steady([](const Point& p) { return Point{p[0], -p[1]}; }, box);
  const auto seeds = uniform_grid(std::array{6, 5}, Bounds({-0.5, -0.5}, {0.5, 0.5}));
  const auto basis = extract_long(saddle, seeds, cfg);
  const auto lat = detect_lattice(basis.seeds);
  REQUIRE(lat);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto tr = lattice_reconstruct(basis, *lat, seeds.points[i]);
    for (int j = 0; j < 5; ++j) CHECK(tr.positions[static_cast<std::size_t>(j)] == basis.end(i, j));
  }
  const Point mid = (seeds.points[7] + seeds.points[8]) * 0.5;
  const auto tm = lattice_reconstruct(basis, *lat, mid);
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 2; ++k)
      CHECK(tm.positions[static_cast<std::size_t>(j)][k] ==
            doctest::Approx(0.5 * (basis.end(7, j)[k] + basis.end(8, j)[k])).epsilon(1e-14));
  // The saddle's flow map (x e^t, y e^-t) is linear in the seed, so the
  // multilinear reconstruction matches the closed form up to RK4 error.
  for (const auto& s : pseudorandom(2, 200, Bounds({-0.4, -0.3}, {0.4, 0.3}), 8).points) {
    const auto tr = lattice_reconstruct(basis, *lat, s);
    for (int j = 0; j < 5; ++j) {
      const double t = 0.1 * (j + 1);
      CHECK(std::abs(tr.positions[static_cast<std::size_t>(j)][0] - s[0] * std::exp(t)) < 1e-10);
      CHECK(std::abs(tr.positions[static_cast<std::size_t>(j)][1] - s[1] * std::exp(-t)) < 1e-10);
    }
  }
  CHECK(lattice_reconstruct(basis, *lat, Point{0.9, 0.0}).valid == std::vector<std::uint8_t>(5, 0));
}

TEST_CASE("lattice: halving the spacing quarters the error") {
  // x' = x^2 has the nonlinear flow map x / (1 - x t).
  struct Quadratic {
    Point velocity(const Point& p, double) const { return {p[0] * p[0], 0.0}; }
    Bounds domain() const { return Bounds({0.0, 0.0}, {1.0, 1.0}); }
  };
  const Bounds box = Quadratic{}.domain();
  const auto cfg = config(0.01, 10, 4);
  auto max_error = [&](int res) {
    const auto seeds = uniform_grid(std::array{res, 3}, Bounds({0.1, 0.1}, {0.5, 0.9}));
    FlowMapSet basis;
    basis.seeds = seeds.points;
    basis.cfg = cfg;
    basis.bounds = box;
    for (const auto& s : seeds.points) {
      const auto tr = advect(Quadratic{}, s, cfg);
      basis.ends.insert(basis.ends.end(), tr.positions.begin(), tr.positions.end());
      basis.valid.insert(basis.valid.end(), tr.valid.begin(), tr.valid.end());
    }
    const auto lat = detect_lattice(basis.seeds);
    double worst = 0.0;
    for (const auto& s : pseudorandom(2, 400, Bounds({0.2, 0.3}, {0.4, 0.7}), 2).points) {
      const auto tr = lattice_reconstruct(basis, *lat, s);
      for (int j = 0; j < 4; ++j) {
        const double t = 0.1 * (j + 1);
        worst = std::max(worst, std::abs(tr.positions[static_cast<std::size_t>(j)][0] - s[0] / (1 - s[0] * t)));
      }
    }
    return worst;
  };
  const double e1 = max_error(6), e2 = max_error(12), e3 = max_error(24);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("run_baseline loads, builds and times each phase") {
  testing::TempDir dir;
  const auto basis = extract_long(DoubleGyre{}, uniform_grid(std::array{16, 8}, DoubleGyre{}.domain()), config(0.01, 5, 6));
  write_flowmap(basis, dir / "b.npy");
  const auto q = pseudorandom(2, 40, Bounds({0.3, 0.2}, {1.7, 0.8}), 1);
  const auto bc = run_baseline(dir / "b.npy", q.points);
  REQUIRE(bc.tri);
  CHECK_FALSE(bc.lattice);
  CHECK(bc.trajectories == bc_reconstruct_all(basis, *bc.tri, q.points));
  CHECK(bc.timings.load_s > 0.0);
  CHECK(bc.timings.triangulate_s > 0.0);
  CHECK(bc.timings.interpolate_s >= 0.0);
  const auto lat = run_baseline(dir / "b.npy", q.points, true);
  REQUIRE(lat.lattice);
  CHECK(lat.trajectories == lattice_reconstruct_all(basis, *lat.lattice, q.points));
  const auto scattered = extract_long(DoubleGyre{}, sobol(2, 50, DoubleGyre{}.domain()), config(0.01, 5, 6));
  write_flowmap(scattered, dir / "s.npy");
  CHECK_THROWS_AS(run_baseline(dir / "s.npy", q.points, true), InvalidArgument);
}
