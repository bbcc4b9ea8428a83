#include <doctest.h>

#include <cmath>

#include "flowmap/error.hpp"
#include "flowmap/eval.hpp"
#include "flowmap/inference.hpp"
#include "flowmap/reconstruct.hpp"
#include "support/oracles.hpp"

using namespace flowmap;

namespace {

Trajectory make(std::vector<Point> pos, std::vector<std::uint8_t> valid = {}) {
  Trajectory t;
  t.seed = pos.front();
  if (valid.empty()) valid.assign(pos.size(), 1);
  t.positions = std::move(pos);
  t.valid = std::move(valid);
  return t;
}

TraceConfig config(double step, int interval, int n) {
  TraceConfig c;
  c.step = step;
  c.interval = interval;
  c.file_cycles = n;
  return c;
}

}  // namespace

TEST_CASE("trajectory error arithmetic") {
  const auto truth = make({Point{0.0, 0.0}, Point{1.0, 1.0}, Point{2.0, 0.5}});
  CHECK(trajectory_error(truth, truth).l1 == 0.0);
  const auto shifted = make({Point{0.1, 0.1}, Point{1.1, 1.1}, Point{2.1, 0.6}});
  CHECK(trajectory_error(shifted, truth).l1 == doctest::Approx(0.1));
  CHECK(trajectory_error(shifted, truth).euclid == doctest::Approx(0.1 * std::sqrt(2.0)));
  CHECK(trajectory_error(shifted, truth).n_valid == 3);

  const auto a = make({Point{0.2, 0.0}, Point{0.0, 0.4}}), zero = make({Point{0.0, 0.0}, Point{0.0, 0.0}});
  const auto e = trajectory_error(a, zero);
  CHECK(e.l1 == doctest::Approx((0.1 + 0.2) / 2));
  CHECK(e.euclid == doctest::Approx((0.2 + 0.4) / 2));

  // Cycles invalid in either trajectory are skipped; the mean is over n_valid.
  const auto partly = make({Point{0.2, 0.0}, Point{9.0, 9.0}}, {1, 0});
  const auto ep = trajectory_error(partly, zero);
  CHECK(ep.n_valid == 1);
  CHECK(ep.l1 == doctest::Approx(0.1));
  CHECK_FALSE(trajectory_error(make({Point{0.0, 0.0}}, {0}), make({Point{0.0, 0.0}})).defined());
  CHECK_THROWS_AS(trajectory_error(truth, zero), InvalidArgument);
  CHECK_THROWS_AS(trajectory_error(make({Point{0.0, 0.0, 0.0}}), make({Point{0.0, 0.0}})), InvalidArgument);
}

TEST_CASE("summary statistics") {
  auto s = error_stats(std::vector<double>{3, 1, 2});
  CHECK(s.max == 3);
  CHECK(s.min == 1);
  CHECK(s.mean == 2);
  CHECK(s.median == 2);
  s = error_stats(std::vector<double>{5});
  CHECK(s.min == 5);
  CHECK(s.max == 5);
  CHECK(s.mean == 5);
  CHECK(s.median == 5);
  CHECK(s.count == 1);
  CHECK(error_stats(std::vector<double>{4, 1, 3, 2}).median == 2);
  CHECK_THROWS_AS(error_stats(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("evaluate excludes seeds with no common valid cycle") {
  const auto zero = make({Point{0.0, 0.0}, Point{0.0, 0.0}});
  const std::vector<Trajectory> pred{make({Point{0.2, 0.0}, Point{0.2, 0.0}}), make({Point{0.0, 0.0}, Point{0.0, 0.0}}, {0, 0}),
                                     make({Point{0.0, 0.4}, Point{0.0, 0.4}})};
  const std::vector<Trajectory> truth{zero, zero, zero};
  const auto r = evaluate(pred, truth);
  CHECK(r.excluded_invalid == 1);
  CHECK(r.l1.count == 2);
  CHECK(r.per_seed.size() == 2);
  CHECK(r.per_seed[0] == doctest::Approx(0.1));
  CHECK(r.per_seed[1] == doctest::Approx(0.2));
  CHECK(r.l1.median == doctest::Approx(0.1));
  CHECK_THROWS_AS(evaluate(std::vector<Trajectory>{zero}, truth), InvalidArgument);
}

TEST_CASE("reference trajectories use the refined step") {
  const auto cfg = config(0.01, 5, 10);
  const std::vector<Point> seeds{Point{0.5, 0.5}, Point{1.3, 0.2}, Point{3.0, 0.5}};
  const auto ref = reference_trajectories(DoubleGyre{}, seeds, cfg, 10);
  auto v = [](const oracle::Vec& x, double t) { return oracle::double_gyre(x, t); };
  for (std::size_t i = 0; i < 2; ++i) {
    oracle::Vec q{seeds[i][0], seeds[i][1], 0};
    for (int j = 0; j < 10; ++j) {
      q = oracle::rk4(v, q, 0.05 * j, 0.001, 50);
      CHECK(ref[i].positions[static_cast<std::size_t>(j)][0] == doctest::Approx(q[0]).epsilon(1e-12));
      CHECK(ref[i].positions[static_cast<std::size_t>(j)][1] == doctest::Approx(q[1]).epsilon(1e-12));
    }
  }
  CHECK(ref[2].valid == std::vector<std::uint8_t>(10, 0));
}

TEST_CASE("noise floor and the tracer self-test") {
  const auto cfg = config(0.01, 5, 20);
  const auto seeds = pseudorandom(2, 200, DoubleGyre{}.domain(), 3);
  const auto truth = reference_trajectories(DoubleGyre{}, seeds.points, cfg);
  const auto nf = noise_floor(DoubleGyre{}, seeds.points, cfg, truth);
  CHECK(nf.l1.max < 1e-6);
  CHECK(nf.l1.count == 200);
  CHECK(evaluate(truth, truth).l1.max == 0.0);

  // Barycentric answers at basis seeds are the stored tracer rows, so their
  // error is exactly the noise floor.
  const auto basis = extract_long(DoubleGyre{}, seeds, cfg);
  const auto tri = triangulate(basis.seeds);
  const auto bc = evaluate(bc_reconstruct_all(basis, tri, seeds.points), truth);
  CHECK(bc.per_seed == nf.per_seed);
}

TEST_CASE("5000-seed evaluation counts every valid seed") {
  const auto cfg = config(0.01, 5, 20);
  const auto seeds = pseudorandom(2, 5000, DoubleGyre{}.domain(), 2024);
  const auto truth = reference_trajectories(DoubleGyre{}, seeds.points, cfg, 2);
  const auto r = noise_floor(DoubleGyre{}, seeds.points, cfg, truth);
  CHECK(r.l1.count == 5000);
  CHECK(r.excluded_invalid == 0);
}

TEST_CASE("evaluate_model scores inferred trajectories") {
  auto m = init_model(MlpArch::make(2, 1, 1, 2, 8, Activation::Sine), Normalization{DoubleGyre{}.domain(), 5}, 3);
  const auto cfg = config(0.01, 5, 5);
  const auto seeds = pseudorandom(2, 30, DoubleGyre{}.domain(), 4);
  const auto truth = reference_trajectories(DoubleGyre{}, seeds.points, cfg);
  const auto r = evaluate_model(m, seeds.points, truth);
  CHECK(r.per_seed == evaluate(infer_trajectories(m, seeds.points), truth).per_seed);
}
