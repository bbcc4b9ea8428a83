#pragma once

// Trajectory error metrics and reference ground truth.

#include <span>
#include <vector>

#include "flowmap/field.hpp"
#include "flowmap/mlp.hpp"
#include "flowmap/tracer.hpp"

namespace flowmap {

struct TrajectoryError {
  double l1 = 0.0;      // mean over cycles of the mean absolute coordinate difference
  double euclid = 0.0;  // mean over cycles of the Euclidean distance
  int n_valid = 0;      // cycles valid in both trajectories
  bool defined() const { return n_valid > 0; }
};

/// Averages over cycles valid in both trajectories (n_valid, not n).
/// Throws InvalidArgument when lengths or dimensions differ.
TrajectoryError trajectory_error(const Trajectory& pred, const Trajectory& truth);

struct ErrorStats {
  std::size_t count = 0;
  double min = 0.0, max = 0.0, mean = 0.0;
  double median = 0.0;  // lower middle element for even counts
};

/// Throws InvalidArgument for an empty list.
ErrorStats error_stats(std::span<const double> errors);

struct ErrorReport {
  std::vector<double> per_seed;         // L1 errors of evaluated seeds, input order
  std::vector<double> per_seed_euclid;
  ErrorStats l1;
  ErrorStats euclid;
  std::size_t excluded_invalid = 0;     // seeds with no common valid cycle
};

/// Per-seed errors of `pred` against `truth`; the two lists pair up by index.
ErrorReport evaluate(std::span<const Trajectory> pred, std::span<const Trajectory> truth);

/// Ground truth: RK4 at step/refine, recording at the same file-cycle times.
/// Seeds outside the field domain give all-invalid trajectories.
std::vector<Trajectory> reference_trajectories(const Field& field, std::span<const Point> seeds,
                                               const TraceConfig& cfg, int refine = 10);

/// Traces at the configured step (what a flow map stores) and scores it
/// against the reference: the error no learned or interpolated method can
/// be expected to beat.
ErrorReport noise_floor(const Field& field, std::span<const Point> seeds, const TraceConfig& cfg,
                        std::span<const Trajectory> truth);

/// Infers every seed with the model and scores it against `truth`.
ErrorReport evaluate_model(const MlpModel& model, std::span<const Point> seeds,
                           std::span<const Trajectory> truth);

}  // namespace flowmap
