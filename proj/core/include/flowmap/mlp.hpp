#pragma once

// Encoder-decoder MLP mapping (start location, file cycle) -> end location.
//
//   start --> [position encoder] --+
//                                   concat --> [decoder] --> end
//   cycle --> [cycle encoder]    --+
//
// Hidden layers use sin(omega * (x W + b)) (or ReLU); the output layer is
// affine. Inputs and targets live in a normalised [-1, 1] space.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowmap/flowmap.hpp"
#include "flowmap/point.hpp"
#include "flowmap/tracer.hpp"

namespace flowmap {

enum class Activation { Sine, ReLU };

std::string to_string(Activation a);

struct MlpArch {
  int dim = 2;
  std::vector<int> pos_widths;    // one entry per position-encoder layer
  std::vector<int> cycle_widths;  // one entry per cycle-encoder layer
  std::vector<int> dec_widths;    // decoder hidden layers; the output layer (width dim) is implicit
  Activation activation = Activation::Sine;
  double first_omega = 30.0;   // frequency of the first layer of each encoder
  double hidden_omega = 1.0;   // frequency everywhere else

  /// Encoders of width latent/2 each, decoder hidden layers of width latent.
  static MlpArch make(int dim, int enc_pos_layers, int enc_cycle_layers, int dec_layers, int latent,
                      Activation act);
  /// Parses "sine:D=256,enc=4/4,dec=6" (also relu:, w0=30).
  static MlpArch parse(std::string_view text, int dim);

  /// Throws InvalidArgument for empty segments or non-positive widths.
  void validate() const;
  int latent() const;
  std::string str() const;
  friend bool operator==(const MlpArch&, const MlpArch&) = default;
};

enum class LayerKind { Sine, ReLU, Linear };

struct Layer {
  int in = 0;
  int out = 0;
  LayerKind kind = LayerKind::Linear;
  double omega = 1.0;
  std::vector<double> weight;  // in x out, row-major
  std::vector<double> bias;    // out

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Affine maps between domain space and the network's [-1, 1] space.
struct Normalization {
  Bounds bounds;
  int n_cycles = 1;

  double cycle(int j) const;
  void to_unit(const Point& p, double* out) const;
  Point from_unit(const double* u) const;
  Point to_unit(const Point& p) const;
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct MlpModel {
  MlpArch arch;
  std::vector<Layer> pos_encoder;
  std::vector<Layer> cycle_encoder;
  std::vector<Layer> decoder;  // last layer is the linear output layer
  Normalization norm;
  ExtractionMethod method = ExtractionMethod::Long;
  int samples_per_map = 1;     // hybrid map length p
  TraceConfig trace;           // how the training flow maps were produced
  std::string field;           // source field descriptor, informational

  int dim() const { return arch.dim; }
  int n_file_cycles() const { return norm.n_cycles; }
  /// File cycles per map used for inference chaining.
  int map_length() const {
    return method == ExtractionMethod::Long ? norm.n_cycles
                                            : (method == ExtractionMethod::Short ? 1 : samples_per_map);
  }
  std::size_t parameter_count() const;
  /// Layers in canonical order: position encoder, cycle encoder, decoder.
  std::vector<const Layer*> layers() const;
  std::vector<Layer*> layers();
  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Closed-form parameter count sum over layers of (fan_in + 1) * fan_out.
std::size_t parameter_count(const MlpArch& arch);

/// Sine: first encoder layers U(-1/fan_in, 1/fan_in) applied with first_omega,
/// other layers U(-sqrt(6/fan_in)/hidden_omega, ...); ReLU: Kaiming uniform.
/// Biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)). Deterministic in rng_seed.
MlpModel init_model(const MlpArch& arch, const Normalization& norm, std::uint64_t rng_seed);

/// Network inputs/targets in normalised space, invalid samples dropped.
struct Dataset {
  int dim = 2;
  std::vector<double> pos;     // count x dim
  std::vector<double> cycle;   // count
  std::vector<double> target;  // count x dim
  std::size_t size() const { return cycle.size(); }
};

Dataset make_dataset(const Normalization& norm, std::span<const TrainingSample> samples);

/// Per-layer activations retained for backpropagation.
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<std::vector<double>> pos_z, pos_a;
  std::vector<std::vector<double>> cyc_z, cyc_a;
  std::vector<double> concat;
  std::vector<std::vector<double>> dec_z, dec_a;
  const std::vector<double>& output() const { return dec_a.back(); }
};

/// Forward pass on normalised inputs (batch x dim positions, batch cycles).
void forward_unit(const MlpModel& model, std::size_t batch, const double* pos, const double* cycle,
                  ForwardCache& cache);

/// Normalised-space output for normalised inputs; rows independent of batch.
std::vector<double> predict_unit(const MlpModel& model, std::span<const double> pos,
                                 std::span<const double> cycle);

/// Outputs for every (start, cycle) pair, start-major: row s * cycles + c.
/// Encoders run once per distinct input; rows match predict_unit exactly.
std::vector<double> predict_grid_unit(const MlpModel& model, std::span<const double> pos,
                                      std::span<const double> cycle);

/// Domain-space prediction. Throws InvalidArgument for cycles outside [0, n-1].
Point forward(const MlpModel& model, const Point& start, int cycle);
std::vector<Point> forward(const MlpModel& model, std::span<const Point> starts,
                           std::span<const int> cycles);

}  // namespace flowmap
