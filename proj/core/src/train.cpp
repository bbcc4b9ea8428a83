#include "flowmap/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numeric>
#include <random>

#include "flowmap/error.hpp"
#include "kernels.hpp"
#include "vmath.hpp"

namespace flowmap {
namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Backpropagates through one chain of layers. `g` holds dL/d(output of the
// chain) on entry; on exit it holds dL/d(input) when want_input_grad is set.
void backprop_chain(const std::vector<Layer>& chain, const std::vector<std::vector<double>>& zs,
                    const std::vector<std::vector<double>>& as, const double* input, std::size_t batch,
                    std::vector<double>& g, Gradients& grads, std::size_t slot, bool want_input_grad) {
  thread_local std::vector<double> dz, next;
  for (std::size_t i = chain.size(); i-- > 0;) {
    const Layer& l = chain[i];
    const auto in = static_cast<std::size_t>(l.in), out = static_cast<std::size_t>(l.out);
    const auto& z = zs[i];
    dz.resize(batch * out);
    switch (l.kind) {
      case LayerKind::Sine:
        vmath::cos_scaled(z.data(), dz.data(), dz.size(), l.omega);
        for (std::size_t k = 0; k < dz.size(); ++k) dz[k] *= l.omega * g[k];
        break;
      case LayerKind::ReLU:
        for (std::size_t k = 0; k < dz.size(); ++k) dz[k] = z[k] > 0.0 ? g[k] : 0.0;
        break;
      case LayerKind::Linear:
        std::copy(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(dz.size()), dz.begin());
        break;
    }
    const double* x = i == 0 ? input : as[i - 1].data();
    auto& dw = grads.weight[slot + i];
    auto& db = grads.bias[slot + i];
    kernels::gemm_tn(in, out, batch, x, dz.data(), dw.data());
    kernels::column_sums(batch, out, dz.data(), db.data());
    if (i > 0 || want_input_grad) {
      next.resize(batch * in);
      kernels::gemm_nt(batch, in, out, dz.data(), l.weight.data(), next.data());
      g.swap(next);
    }
  }
}

std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  // Lemire's multiply-shift with rejection; portable across standard libraries.
  unsigned __int128 m = static_cast<unsigned __int128>(gen()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t t = (0 - n) % n;
    while (low < t) {
      m = static_cast<unsigned __int128>(gen()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace

MlpModel init_model_for(const FlowMapSet& set, const MlpArch& arch, std::uint64_t rng_seed) {
  if (arch.dim != set.dim()) throw InvalidArgument("architecture dimension does not match flow maps");
  MlpModel m = init_model(arch, Normalization{set.bounds, set.cycle_count()}, rng_seed);
  m.method = set.method;
  m.samples_per_map = set.map_length();
  m.trace = set.cfg;
  m.field = set.field;
  return m;
}

Dataset make_dataset(const MlpModel& model, const FlowMapSet& set) {
  if (set.cycle_count() != model.n_file_cycles()) throw InvalidArgument("flow maps and model differ in cycle count");
  const auto samples = to_training_samples(set);
  return make_dataset(model.norm, samples);
}

double l1_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw InvalidArgument("l1_loss: size mismatch");
  if (pred.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

double l1_loss(const Point& pred, const Point& target) {
  if (pred.dim() != target.dim()) throw InvalidArgument("l1_loss: dimension mismatch");
  return l1_loss(pred.coords(), target.coords());
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  for (const Layer* l : model.layers()) {
    g.weight.emplace_back(l->weight.size(), 0.0);
    g.bias.emplace_back(l->bias.size(), 0.0);
  }
  return g;
}

double backward(const MlpModel& model, std::size_t batch, const double* pos, const double* cycle,
                const double* target, Gradients& grads) {
  if (batch == 0) throw InvalidArgument("backward: empty batch");
  if (grads.weight.size() != model.layers().size()) grads = Gradients::zeros_like(model);
  thread_local ForwardCache cache;
  forward_unit(model, batch, pos, cycle, cache);
  const auto dim = static_cast<std::size_t>(model.dim());
  const auto& out = cache.output();
  const double scale = 1.0 / static_cast<double>(batch * dim);
  thread_local std::vector<double> g, gp, gc;
  g.resize(batch * dim);
  double loss = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = out[k] - target[k];
    loss += std::abs(d);
    g[k] = sign(d) * scale;
  }
  loss *= scale;

  const std::size_t n_pos = model.pos_encoder.size(), n_cyc = model.cycle_encoder.size();
  backprop_chain(model.decoder, cache.dec_z, cache.dec_a, cache.concat.data(), batch, g, grads,
                 n_pos + n_cyc, true);
  const auto pw = static_cast<std::size_t>(model.pos_encoder.back().out);
  const auto cw = static_cast<std::size_t>(model.cycle_encoder.back().out);
  gp.resize(batch * pw);
  gc.resize(batch * cw);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(g.data() + b * (pw + cw), pw, gp.data() + b * pw);
    std::copy_n(g.data() + b * (pw + cw) + pw, cw, gc.data() + b * cw);
  }
  backprop_chain(model.pos_encoder, cache.pos_z, cache.pos_a, pos, batch, gp, grads, 0, false);
  backprop_chain(model.cycle_encoder, cache.cyc_z, cache.cyc_a, cycle, batch, gc, grads, n_pos, false);
  return loss;
}

double backward(const MlpModel& model, const Dataset& data, Gradients& grads) {
  return backward(model, data.size(), data.pos.data(), data.cycle.data(), data.target.data(), grads);
}

double dataset_loss(const MlpModel& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  constexpr std::size_t kChunk = 4096;
  const auto dim = static_cast<std::size_t>(model.dim());
  ForwardCache cache;
  double sum = 0.0;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, data.size() - start);
    forward_unit(model, count, data.pos.data() + start * dim, data.cycle.data() + start, cache);
    const auto& out = cache.output();
    for (std::size_t k = 0; k < count * dim; ++k) sum += std::abs(out[k] - data.target[start * dim + k]);
  }
  return sum / static_cast<double>(data.size() * dim);
}

Adam::Adam(const MlpModel& model, AdamConfig cfg)
    : cfg_(cfg), m_(Gradients::zeros_like(model)), v_(Gradients::zeros_like(model)) {}

void Adam::step(MlpModel& model, const Gradients& grads, double lr) {
  auto layers = model.layers();
  if (m_.weight.size() != layers.size()) {
    m_ = Gradients::zeros_like(model);
    v_ = Gradients::zeros_like(model);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double step = lr / bc1, root_bc2 = std::sqrt(bc2);
  const double b1 = cfg_.beta1, b2 = cfg_.beta2, eps = cfg_.eps;
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      p[k] -= step * m[k] / (std::sqrt(v[k]) / root_bc2 + eps);
    }
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i]->weight, grads.weight[i], m_.weight[i], v_.weight[i]);
    update(layers[i]->bias, grads.bias[i], m_.bias[i], v_.bias[i]);
  }
}

PlateauScheduler::PlateauScheduler(double lr, double factor, int patience, double threshold)
    : lr_(lr), factor_(factor), threshold_(threshold), patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {}

bool PlateauScheduler::observe(double loss) {
  if (loss < best_ * (1.0 - threshold_)) {
    best_ = loss;
    bad_ = 0;
  } else {
    ++bad_;
  }
  if (bad_ > patience_) {
    lr_ *= factor_;
    bad_ = 0;
    ++reductions_;
    return true;
  }
  return false;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw InvalidArgument("Adam betas must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw InvalidArgument("Adam eps must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw InvalidArgument("lr factor must lie in (0, 1)");
  if (lr_patience < 0) throw InvalidArgument("lr patience must be >= 0");
}

TrainHistory train(MlpModel& model, const Dataset& data, const Dataset& val, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw InvalidArgument("training set is empty");
  if (data.dim != model.dim()) throw InvalidArgument("dataset dimension does not match model");
  const auto dim = static_cast<std::size_t>(model.dim());
  const std::size_t n = data.size();
  const std::size_t bs = std::min(cfg.batch_size, n);

  Adam adam(model, cfg.adam);
  PlateauScheduler sched(cfg.learning_rate, cfg.lr_factor, cfg.lr_patience);
  Gradients grads = Gradients::zeros_like(model);
  std::mt19937_64 gen(cfg.rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> pos(bs * dim), cyc(bs), tgt(bs * dim);
  TrainHistory hist;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[bounded(gen, i + 1)]);
    const double lr = sched.lr();
    double weighted = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t s = order[start + b];
        std::copy_n(data.pos.data() + s * dim, dim, pos.data() + b * dim);
        std::copy_n(data.target.data() + s * dim, dim, tgt.data() + b * dim);
        cyc[b] = data.cycle[s];
      }
      const double loss = backward(model, count, pos.data(), cyc.data(), tgt.data(), grads);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                            std::to_string(start) + " (lr " + std::to_string(lr) + ")");
      adam.step(model, grads, lr);
      weighted += loss * static_cast<double>(count);
    }
    const double train_loss = weighted / static_cast<double>(n);
    const double val_loss = val.size() > 0 ? dataset_loss(model, val) : train_loss;
    if (!std::isfinite(val_loss))
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    hist.train_loss.push_back(train_loss);
    hist.val_loss.push_back(val_loss);
    hist.lr.push_back(lr);
    sched.observe(val_loss);
    if (cfg.on_epoch && !cfg.on_epoch(epoch, train_loss, val_loss, lr)) break;
  }
  return hist;
}

}  // namespace flowmap
