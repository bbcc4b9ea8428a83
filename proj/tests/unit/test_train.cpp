#include <doctest.h>

#include <cmath>
#include <random>

#include "flowmap/error.hpp"
#include "flowmap/parallel.hpp"
#include "flowmap/train.hpp"

using namespace flowmap;

namespace {

Normalization dg_norm(int n = 10) { return {Bounds({0.0, 0.0}, {2.0, 1.0}), n}; }

struct Batch {
  std::vector<double> pos, cycle, target;
  std::size_t size() const { return cycle.size(); }
};

Batch random_batch(std::size_t n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      b.pos.push_back(u(rng));
      b.target.push_back(u(rng));
    }
    b.cycle.push_back(u(rng));
  }
  return b;
}

double loss_of(const MlpModel& m, const Batch& b) { return l1_loss(predict_unit(m, b.pos, b.cycle), b.target); }

// Central differences with h = 1e-6 against the analytic gradient of every
// probed parameter; returns the worst relative error.
double worst_gradient_error(MlpModel m, const Batch& b, int probes, std::uint64_t seed) {
  Gradients g = Gradients::zeros_like(m);
  backward(m, b.size(), b.pos.data(), b.cycle.data(), b.target.data(), g);
  auto layers = m.layers();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  const double h = 1e-6;
  for (int p = 0; p < probes; ++p) {
    // Cycle through layers so every position is probed.
    const std::size_t li = static_cast<std::size_t>(p) % layers.size();
    Layer& l = *layers[li];
    const bool bias = (rng() % 4) == 0;
    auto& params = bias ? l.bias : l.weight;
    const std::size_t k = rng() % params.size();
    const double saved = params[k];
    params[k] = saved + h;
    const double up = loss_of(m, b);
    params[k] = saved - h;
    const double down = loss_of(m, b);
    params[k] = saved;
    const double fd = (up - down) / (2 * h);
    const double an = bias ? g.bias[li][k] : g.weight[li][k];
    const double scale = std::max(std::abs(fd) + std::abs(an), 1e-7);
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("L1 loss arithmetic") {
  CHECK(l1_loss(std::vector<double>{0.1, 0.2}, std::vector<double>{0.1, 0.2}) == 0.0);
  CHECK(l1_loss(std::vector<double>{0.2, -0.2}, std::vector<double>{0.0, 0.0}) == doctest::Approx(0.2));
  // Mean over samples of per-sample means.
  const std::vector<double> pred{1, 2, 3, 4}, target{0, 0, 0, 0};
  CHECK(l1_loss(pred, target) == doctest::Approx((l1_loss(std::vector<double>{1, 2}, std::vector<double>{0, 0}) +
                                                  l1_loss(std::vector<double>{3, 4}, std::vector<double>{0, 0})) /
                                                 2));
  CHECK(l1_loss(Point{1.0, 1.0}, Point{0.5, 2.0}) == doctest::Approx(0.75));
}

TEST_CASE("analytic gradients match central differences") {
  for (auto act : {Activation::Sine, Activation::ReLU}) {
    CAPTURE(to_string(act));
    const auto m = init_model(MlpArch::make(2, 2, 2, 3, 8, act), dg_norm(), 5);
    const auto b = random_batch(16, 2, 77);
    CHECK(worst_gradient_error(m, b, 200, 3) < 1e-4);
    const auto m3 = init_model(MlpArch::make(3, 1, 2, 2, 6, act), Normalization{Bounds({0, 0, 0}, {1, 1, 1}), 4}, 6);
    CHECK(worst_gradient_error(m3, random_batch(9, 3, 78), 120, 4) < 1e-4);
  }
}

TEST_CASE("duplicated rows give the gradient of the single row") {
  const auto m = init_model(MlpArch::make(2, 2, 2, 2, 12, Activation::Sine), dg_norm(), 2);
  const auto one = random_batch(1, 2, 5);
  Batch dup;
  for (int r = 0; r < 4; ++r) {
    dup.pos.insert(dup.pos.end(), one.pos.begin(), one.pos.end());
    dup.cycle.insert(dup.cycle.end(), one.cycle.begin(), one.cycle.end());
    dup.target.insert(dup.target.end(), one.target.begin(), one.target.end());
  }
  Gradients g1 = Gradients::zeros_like(m), g4 = Gradients::zeros_like(m);
  const double l1 = backward(m, 1, one.pos.data(), one.cycle.data(), one.target.data(), g1);
  const double l4 = backward(m, 4, dup.pos.data(), dup.cycle.data(), dup.target.data(), g4);
  CHECK(l4 == doctest::Approx(l1).epsilon(1e-15));
  for (std::size_t li = 0; li < g1.weight.size(); ++li) {
    for (std::size_t k = 0; k < g1.weight[li].size(); ++k)
      CHECK(g4.weight[li][k] == doctest::Approx(g1.weight[li][k]).epsilon(1e-13));
    for (std::size_t k = 0; k < g1.bias[li].size(); ++k)
      CHECK(g4.bias[li][k] == doctest::Approx(g1.bias[li][k]).epsilon(1e-13));
  }
}

TEST_CASE("zero-loss batch has zero gradients") {
  const auto m = init_model(MlpArch::make(2, 2, 2, 2, 12, Activation::Sine), dg_norm(), 2);
  auto b = random_batch(6, 2, 8);
  b.target = predict_unit(m, b.pos, b.cycle);
  Gradients g = Gradients::zeros_like(m);
  CHECK(backward(m, b.size(), b.pos.data(), b.cycle.data(), b.target.data(), g) == 0.0);
  CHECK(g == Gradients::zeros_like(m));
}

TEST_CASE("Adam: hand-computed first step and fixed points") {
  auto m = init_model(MlpArch::make(2, 1, 1, 1, 4, Activation::Sine), dg_norm(), 1);
  const MlpModel before = m;
  Adam adam(m, AdamConfig{});
  Gradients g = Gradients::zeros_like(m);
  adam.step(m, g, 1e-3);
  CHECK(m == before);

  // Scalar case: m1 = 0.1 g, v1 = 0.001 g^2, bias-corrected to g and g^2,
  // so the update is lr * g / (|g| + eps).
  g.weight[0][1] = 0.5;
  g.bias[2][0] = -2e-6;
  Adam fresh(m, AdamConfig{});
  Adam copy = fresh;
  MlpModel twin = m;
  fresh.step(m, g, 1e-3);
  CHECK(m.pos_encoder[0].weight[1] == doctest::Approx(before.pos_encoder[0].weight[1] - 1e-3 * 0.5 / (0.5 + 1e-6)).epsilon(1e-14));
  CHECK(m.decoder[0].bias[0] == doctest::Approx(before.decoder[0].bias[0] + 1e-3 * 2e-6 / (2e-6 + 1e-6)).epsilon(1e-14));
  CHECK(m.pos_encoder[0].weight[0] == before.pos_encoder[0].weight[0]);
  copy.step(twin, g, 1e-3);
  CHECK(twin == m);
  CHECK(copy == fresh);
  CHECK(fresh.steps() == 1);
}

TEST_CASE("plateau scheduler") {
  PlateauScheduler s(1e-3, 0.5, 5, 1e-4);
  int reductions = 0;
  for (int e = 0; e < 12; ++e) reductions += s.observe(1.0);
  CHECK(reductions == 1);
  CHECK(s.lr() == 5e-4);
  reductions += s.observe(1.0);
  CHECK(reductions == 2);
  CHECK(s.lr() == 2.5e-4);

  // Relative improvements below the threshold count as bad epochs.
  PlateauScheduler t(1.0);
  t.observe(1.0);
  for (int e = 0; e < 5; ++e) t.observe(1.0 - 1e-5 * (e + 1));
  CHECK(t.observe(0.9999) == true);
  PlateauScheduler u(1.0);
  u.observe(1.0);
  for (int e = 0; e < 10; ++e) CHECK_FALSE(u.observe(1.0 - 0.01 * (e + 1)));
}

TEST_CASE("training: loss drops, runs are reproducible") {
  std::vector<TrainingSample> rows;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 4; ++j) {
      const Point s{0.03 * i, 0.015 * i};
      rows.push_back({s, j, Point{s[0] + 0.1 * j, s[1]}, true});
    }
  const auto norm = Normalization{Bounds({0.0, 0.0}, {2.0, 1.0}), 4};
  const auto data = make_dataset(norm, rows);
  const auto arch = MlpArch::make(2, 2, 2, 2, 32, Activation::Sine);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  cfg.rng_seed = 4;
  auto a = init_model(arch, norm, 1), b = init_model(arch, norm, 1);
  const auto ha = train(a, data, {}, cfg);
  const auto hb = train(b, data, {}, cfg);
  CHECK(a == b);
  CHECK(ha.train_loss == hb.train_loss);
  CHECK(ha.epochs() == 40);
  CHECK(ha.train_loss.back() < 0.5 * ha.train_loss.front());
  CHECK(ha.val_loss == ha.train_loss);

  int seen = 0;
  cfg.on_epoch = [&](int, double, double, double) { return ++seen < 3; };
  auto c = init_model(arch, norm, 1);
  CHECK(train(c, data, data, cfg).epochs() == 3);

  cfg.on_epoch = {};
  cfg.learning_rate = 1e300;
  auto d = init_model(arch, norm, 1);
  CHECK_THROWS_AS(train(d, data, {}, cfg), TrainingError);
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(d, data, {}, cfg), InvalidArgument);
}

TEST_CASE("training is independent of the worker count") {
  // Batches large enough that the kernels split work across threads.
  const auto b = random_batch(1024, 2, 31);
  std::vector<TrainingSample> rows;
  for (std::size_t i = 0; i < b.size(); ++i)
    rows.push_back({Point{1.0 + b.pos[2 * i], 0.5 + 0.5 * b.pos[2 * i + 1]}, static_cast<int>(i % 10),
                    Point{1.0 + b.target[2 * i], 0.5 + 0.5 * b.target[2 * i + 1]}, true});
  const auto data = make_dataset(dg_norm(), rows);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 512;
  const auto arch = MlpArch::make(2, 2, 2, 3, 64, Activation::Sine);
  const int saved = worker_count();
  set_worker_count(1);
  auto one = init_model(arch, dg_norm(), 2);
  train(one, data, {}, cfg);
  set_worker_count(4);
  auto four = init_model(arch, dg_norm(), 2);
  train(four, data, {}, cfg);
  set_worker_count(saved);
  CHECK(one == four);
}

TEST_CASE("init_model_for copies flow-map metadata") {
  FlowMapSet set;
  set.method = ExtractionMethod::Hybrid;
  set.cfg.file_cycles = 8;
  set.cfg.samples_per_map = 4;
  set.bounds = Bounds({0.0, 0.0}, {2.0, 1.0});
  set.field = "double-gyre";
  const auto m = init_model_for(set, MlpArch::make(2, 1, 1, 1, 8, Activation::Sine), 3);
  CHECK(m.method == ExtractionMethod::Hybrid);
  CHECK(m.samples_per_map == 4);
  CHECK(m.map_length() == 4);
  CHECK(m.n_file_cycles() == 8);
  CHECK(m.field == "double-gyre");
  CHECK(m.norm.bounds == set.bounds);
}
