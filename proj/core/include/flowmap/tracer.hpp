#pragma once

// Fixed-step RK4 particle advection. Vocabulary: a cycle is one step of
// size `step`; positions are recorded every `interval` cycles (a file cycle).
// Cycle k runs from t0 + k*step to t0 + (k+1)*step.

#include <cmath>
#include <concepts>
#include <limits>
#include <cstdint>
#include <optional>
#include <vector>

#include "flowmap/error.hpp"
#include "flowmap/point.hpp"

namespace flowmap {

template <typename F>
concept VelocityField = requires(const F& f, const Point& p, double t) {
  { f.velocity(p, t) } -> std::convertible_to<Point>;
  { f.domain() } -> std::convertible_to<Bounds>;
};

struct TraceConfig {
  double step = 0.01;      // cycle length (time units)
  int interval = 5;        // cycles between file cycles
  int file_cycles = 100;   // recorded positions per trajectory
  double t0 = 0.0;
  int samples_per_map = 1; // hybrid extraction only

  /// Throws InvalidArgument if any field is out of range.
  void validate() const;
  /// Time spanned by all file cycles.
  double duration() const { return step * interval * file_cycles; }
  double cycle_time(long cycle) const { return t0 + static_cast<double>(cycle) * step; }

  friend bool operator==(const TraceConfig&, const TraceConfig&) = default;
};

struct Trajectory {
  Point seed;
  std::vector<Point> positions;       // one per file cycle
  std::vector<std::uint8_t> valid;    // monotone: once 0, stays 0

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

template <VelocityField F>
Point rk4_step(const F& field, const Point& p, double t, double h) {
  const Point k1 = field.velocity(p, t);
  const Point k2 = field.velocity(p + k1 * (0.5 * h), t + 0.5 * h);
  const Point k3 = field.velocity(p + k2 * (0.5 * h), t + 0.5 * h);
  const Point k4 = field.velocity(p + k3 * h, t + h);
  Point out = p;
  for (int a = 0; a < p.dim(); ++a)
    out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
  return out;
}

/// Traces one particle from `start` at cycle `first_cycle` for `count` file
/// cycles. A particle leaving the domain (or outliving a sampled field) is
/// frozen at its last in-domain position and flagged invalid from that file
/// cycle on.
template <VelocityField F>
void trace_into(const F& field, const Bounds& domain, const Point& start, const TraceConfig& cfg,
                long first_cycle, int count, std::vector<Point>& positions,
                std::vector<std::uint8_t>& valid) {
  Point pos = start;
  bool alive = true;
  long cycle = first_cycle;
  for (int j = 0; j < count; ++j) {
    for (int c = 0; c < cfg.interval && alive; ++c, ++cycle) {
      Point next;
      try {
        next = rk4_step(field, pos, cfg.cycle_time(cycle), cfg.step);
      } catch (const TimeOutOfRange&) {
        alive = false;
        break;
      }
      if (!next.finite() || !domain.contains(next)) {
        alive = false;
        break;
      }
      pos = next;
    }
    positions.push_back(pos);
    valid.push_back(alive ? 1 : 0);
  }
}

/// Throws InvalidArgument("seed out of domain") for seeds outside the field.
template <VelocityField F>
Trajectory advect(const F& field, const Point& seed, const TraceConfig& cfg) {
  cfg.validate();
  const Bounds domain = field.domain();
  if (!domain.contains(seed)) throw InvalidArgument("seed out of domain: " + seed.str());
  Trajectory tr;
  tr.seed = seed;
  tr.positions.reserve(static_cast<std::size_t>(cfg.file_cycles));
  tr.valid.reserve(static_cast<std::size_t>(cfg.file_cycles));
  trace_into(field, domain, seed, cfg, 0, cfg.file_cycles, tr.positions, tr.valid);
  return tr;
}

/// Integrates from t0 to t0 + duration in `steps` RK4 steps, ignoring the
/// domain (test and diagnostic helper).
template <VelocityField F>
Point integrate(const F& field, Point p, double t0, double duration, long steps) {
  const double h = duration / static_cast<double>(steps);
  for (long k = 0; k < steps; ++k) p = rk4_step(field, p, t0 + static_cast<double>(k) * h, h);
  return p;
}

struct ConvergenceResult {
  bool exact = false;  // every step-halving error was zero
  double order = 0.0;
};

/// Empirical order from three step-halvings starting at `base_steps` steps:
/// log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|).
template <VelocityField F>
ConvergenceResult convergence_order(const F& field, const Point& seed, double t0, double duration,
                                    long base_steps = 16) {
  const Point a = integrate(field, seed, t0, duration, base_steps);
  const Point b = integrate(field, seed, t0, duration, base_steps * 2);
  const Point c = integrate(field, seed, t0, duration, base_steps * 4);
  const double e1 = euclidean_distance(a, b);
  const double e2 = euclidean_distance(b, c);
  if (e1 == 0.0 && e2 == 0.0) return {true, 0.0};
  if (e2 == 0.0) return {false, std::numeric_limits<double>::infinity()};
  return {false, std::log2(e1 / e2)};
}

}  // namespace flowmap
