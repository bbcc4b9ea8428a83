#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowmap/point.hpp"

namespace flowmap {

/// Unsteady Double Gyre on [0,2]x[0,1]:
///   psi = A sin(pi f(x,t)) sin(pi y),  f = a(t) x^2 + b(t) x,
///   a = eps sin(omega t),  b = 1 - 2 eps sin(omega t),
///   v = (-dpsi/dy, dpsi/dx).
struct DoubleGyre {
  double amplitude = 0.1;
  double omega = 2.0 * std::numbers::pi / 10.0;
  double epsilon = 0.25;

  Point velocity(const Point& p, double t) const;
  Bounds domain() const;
};

/// Steady Arnold-Beltrami-Childress flow on [0, 2pi]^3.
struct AbcFlow {
  double a = std::numbers::sqrt3;
  double b = std::numbers::sqrt2;
  double c = 1.0;

  Point velocity(const Point& p, double t) const;
  Bounds domain() const;
};

/// Velocity sampled on a vertex-centred regular grid at uniformly spaced
/// times. Multilinear in space with a zero-order clamp outside the bounds;
/// linear in time. A single frame is treated as a steady field.
class GriddedField {
 public:
  GriddedField(Bounds bounds, std::array<int, 3> resolution, double t0, double dt,
               std::vector<std::vector<double>> frames);

  /// Samples fn(node, t) at every grid node of `frame_count` frames.
  static GriddedField sample(Bounds bounds, std::array<int, 3> resolution, int frame_count,
                             double t0, double dt,
                             const std::function<Point(const Point&, double)>& fn);

  /// Loads the JSON descriptor {dims, bounds, dt, t0?, files} and one NPY per
  /// frame, shaped (ny, nx, 2) or (nz, ny, nx, 3).
  static GriddedField load(const std::filesystem::path& descriptor);

  Point velocity(const Point& p, double t) const;
  const Bounds& domain() const { return bounds_; }
  int dim() const { return bounds_.dim(); }
  const std::array<int, 3>& resolution() const { return res_; }
  int frame_count() const { return static_cast<int>(frames_->size()); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  /// Last time the field can be evaluated at (infinite for a steady field).
  double t_end() const;
  /// Velocity at grid node (i, j, k) of a frame.
  Point node(int frame, std::array<int, 3> ijk) const;

  std::string origin;  // descriptor path when loaded from disk

 private:
  Point spatial(const std::vector<double>& frame, const Point& p) const;

  Bounds bounds_;
  std::array<int, 3> res_{1, 1, 1};
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::shared_ptr<const std::vector<std::vector<double>>> frames_;
};

/// A time-varying velocity field. Immutable and safe to share across threads.
class Field {
 public:
  using Variant = std::variant<DoubleGyre, AbcFlow, GriddedField>;

  Field(DoubleGyre f) : v_(f) {}
  Field(AbcFlow f) : v_(f) {}
  Field(GriddedField f) : v_(std::move(f)) {}

  /// Throws TimeOutOfRange for gridded fields queried past their last frame.
  Point velocity(const Point& p, double t) const;
  Bounds domain() const;
  int dim() const { return domain().dim(); }
  const Variant& variant() const { return v_; }

  /// Round-trippable descriptor, e.g. "double-gyre:A=0.1,omega=...,eps=0.25",
  /// "abc:A=...,B=...,C=...", "gridded:/path/descriptor.json".
  std::string describe() const;

 private:
  Variant v_;
};

/// Inverse of Field::describe(). Bare names select the defaults.
Field parse_field(std::string_view text);

}  // namespace flowmap
