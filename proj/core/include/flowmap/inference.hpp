#pragma once

// Trajectory inference from a trained model. Long models answer every cycle
// directly from the seed; hybrid models restart each map from the position
// predicted at the last cycle of the previous map, clamped into the
// domain. A non-finite prediction invalidates the rest of the trajectory.

#include <span>
#include <vector>

#include "flowmap/mlp.hpp"
#include "flowmap/tracer.hpp"

namespace flowmap {

/// positions[i] corresponds to cycles[i]; an empty cycle list means all
/// cycles 0..n-1. Seeds outside the model's domain yield all-invalid
/// trajectories. Throws InvalidArgument for cycles outside [0, n-1].
Trajectory infer_trajectory(const MlpModel& model, const Point& seed, std::span<const int> cycles = {});
std::vector<Trajectory> infer_trajectories(const MlpModel& model, std::span<const Point> seeds,
                                           std::span<const int> cycles = {});

}  // namespace flowmap
