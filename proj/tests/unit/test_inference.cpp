#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowmap/error.hpp"
#include "flowmap/inference.hpp"

using namespace flowmap;

namespace {

MlpModel toy(ExtractionMethod method, int n, int p) {
  auto m = init_model(MlpArch::make(2, 2, 2, 2, 16, Activation::Sine), Normalization{Bounds({0.0, 0.0}, {2.0, 1.0}), n}, 11);
  m.method = method;
  m.samples_per_map = p;
  return m;
}

}  // namespace

TEST_CASE("long models answer each cycle directly") {
  const auto m = toy(ExtractionMethod::Long, 6, 6);
  const Point seed{0.7, 0.4};
  const auto all = infer_trajectory(m, seed);
  REQUIRE(all.size() == 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(all.positions[static_cast<std::size_t>(j)] == forward(m, seed, j));
    CHECK(all.valid[static_cast<std::size_t>(j)] == 1);
  }
  const std::vector<int> order{4, 0, 5, 2};
  const auto some = infer_trajectory(m, seed, order);
  for (std::size_t w = 0; w < order.size(); ++w) CHECK(some.positions[w] == all.positions[static_cast<std::size_t>(order[w])]);
}

TEST_CASE("hybrid with p = n is the long procedure") {
  const auto l = toy(ExtractionMethod::Long, 5, 5);
  const auto h = toy(ExtractionMethod::Hybrid, 5, 5);
  const std::vector<Point> seeds{Point{0.1, 0.1}, Point{1.9, 0.8}, Point{1.0, 0.5}};
  CHECK(infer_trajectories(l, seeds) == infer_trajectories(h, seeds));
}

TEST_CASE("hybrid p = 2, n = 4 chains from the cycle-1 prediction") {
  const auto m = toy(ExtractionMethod::Hybrid, 4, 2);
  const Point seed{0.6, 0.3};
  const auto tr = infer_trajectory(m, seed);
  const Point p0 = forward(m, seed, 0), p1 = forward(m, seed, 1);
  Point start = p1;
  for (int a = 0; a < 2; ++a) start[a] = std::clamp(start[a], 0.0, a == 0 ? 2.0 : 1.0);
  CHECK(tr.positions[0] == p0);
  CHECK(tr.positions[1] == p1);
  CHECK(tr.positions[2] == forward(m, start, 2));
  CHECK(tr.positions[3] == forward(m, start, 3));
  // Requesting only the second map still chains through cycle 1.
  const std::vector<int> late{3};
  CHECK(infer_trajectory(m, seed, late).positions[0] == tr.positions[3]);
  // Short models chain after every cycle.
  const auto s = toy(ExtractionMethod::Short, 3, 1);
  const auto ts = infer_trajectory(s, seed);
  Point q = seed;
  for (int j = 0; j < 3; ++j) {
    q = forward(s, q, j);
    CHECK(ts.positions[static_cast<std::size_t>(j)] == q);
    for (int a = 0; a < 2; ++a) q[a] = std::clamp(q[a], 0.0, a == 0 ? 2.0 : 1.0);
  }
}

TEST_CASE("chain positions are clamped, non-finite ones end the trajectory") {
  auto m = toy(ExtractionMethod::Hybrid, 4, 2);
  // Constant output far outside the domain.
  for (Layer* l : m.layers()) {
    std::fill(l->weight.begin(), l->weight.end(), 0.0);
    std::fill(l->bias.begin(), l->bias.end(), 0.0);
  }
  m.decoder.back().bias = {3.0, -5.0};
  auto tr = infer_trajectory(m, Point{1.0, 0.5});
  CHECK(tr.valid == std::vector<std::uint8_t>{1, 1, 1, 1});
  CHECK(tr.positions[3] == Point{4.0, -2.0});
  m.decoder.back().bias = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  tr = infer_trajectory(m, Point{1.0, 0.5});
  CHECK(tr.valid == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("seeds outside the domain and bad requests") {
  const auto m = toy(ExtractionMethod::Long, 4, 4);
  const std::vector<Point> seeds{Point{1.0, 0.5}, Point{2.5, 0.5}};
  const auto trs = infer_trajectories(m, seeds);
  CHECK(trs[1].valid == std::vector<std::uint8_t>(4, 0));
  CHECK(trs[1].positions == std::vector<Point>(4, seeds[1]));
  CHECK(trs[0].valid == std::vector<std::uint8_t>(4, 1));
  const std::vector<int> bad{4};
  CHECK_THROWS_AS(infer_trajectory(m, Point{1.0, 0.5}, bad), InvalidArgument);
  CHECK_THROWS_AS(infer_trajectory(m, Point{1.0, 0.5, 0.5}), InvalidArgument);
  CHECK(infer_trajectories(m, std::vector<Point>{}).empty());
}
