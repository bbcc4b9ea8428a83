#pragma once

// Loss, reverse-mode gradients, Adam and the training loop for MlpModel.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "flowmap/mlp.hpp"

namespace flowmap {

/// Fresh model for a flow-map set: normalization from its bounds and cycle
/// count, method and trace configuration copied into the model metadata.
MlpModel init_model_for(const FlowMapSet& set, const MlpArch& arch, std::uint64_t rng_seed);

/// Valid samples of `set` in the model's normalised space.
Dataset make_dataset(const MlpModel& model, const FlowMapSet& set);

/// Mean absolute per-coordinate difference.
double l1_loss(std::span<const double> pred, std::span<const double> target);
double l1_loss(const Point& pred, const Point& target);

/// Gradient buffers, one (weight, bias) pair per layer in canonical order.
struct Gradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  static Gradients zeros_like(const MlpModel& model);
  friend bool operator==(const Gradients&, const Gradients&) = default;
};

/// Mean L1 loss of the batch and its exact gradient w.r.t. every parameter.
/// The subgradient of |x| at 0 is taken as 0.
double backward(const MlpModel& model, std::size_t batch, const double* pos, const double* cycle,
                const double* target, Gradients& grads);
double backward(const MlpModel& model, const Dataset& data, Gradients& grads);

/// Mean L1 loss over a dataset, evaluated in chunks.
double dataset_loss(const MlpModel& model, const Dataset& data);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

class Adam {
 public:
  Adam() = default;
  Adam(const MlpModel& model, AdamConfig cfg);

  /// One bias-corrected update of every parameter in place.
  void step(MlpModel& model, const Gradients& grads, double lr);
  long steps() const { return t_; }

  friend bool operator==(const Adam&, const Adam&) = default;

 private:
  AdamConfig cfg_;
  long t_ = 0;
  Gradients m_, v_;
};

/// Halves (by `factor`) the learning rate when the monitored loss has not
/// improved by a relative `threshold` for more than `patience` epochs.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor = 0.5, int patience = 5, double threshold = 1e-4);

  /// Returns true if the rate was reduced.
  bool observe(double loss);
  double lr() const { return lr_; }
  int reductions() const { return reductions_; }

 private:
  double lr_, factor_, threshold_;
  int patience_;
  double best_;
  int bad_ = 0;
  int reductions_ = 0;
};

struct TrainConfig {
  double learning_rate = 5e-4;
  AdamConfig adam;
  std::size_t batch_size = 1024;
  int epochs = 200;
  double lr_factor = 0.5;
  int lr_patience = 5;
  std::uint64_t rng_seed = 1;
  /// Called after every epoch; return false to stop early.
  std::function<bool(int epoch, double train_loss, double val_loss, double lr)> on_epoch;

  static double default_lr(Activation a) { return a == Activation::Sine ? 5e-4 : 1e-4; }
  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> lr;
  std::size_t epochs() const { return train_loss.size(); }
};

/// Mini-batch Adam over shuffled epochs; rng_seed fixes the shuffles.
/// Throws TrainingError if the loss becomes non-finite.
TrainHistory train(MlpModel& model, const Dataset& data, const Dataset& val, const TrainConfig& cfg);

}  // namespace flowmap
