#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

namespace flowmap {

/// A location in a 2D or 3D field domain. Fixed capacity, no heap traffic.
class Point {
 public:
  static constexpr int kMaxDim = 3;

  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<double> coords);
  static Point from_span(std::span<const double> coords);

  int dim() const { return dim_; }
  double operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<double> coords() { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  bool finite() const;
  std::string str() const;

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  Point& operator*=(double s);

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point& a, const Point& b);

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

double euclidean_distance(const Point& a, const Point& b);

/// Axis-aligned box, closed on both ends.
class Bounds {
 public:
  Bounds() = default;
  /// Throws InvalidArgument unless lo[k] < hi[k] on every axis.
  Bounds(Point lo, Point hi);

  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  int dim() const { return lo_.dim(); }
  double extent(int k) const { return hi_[k] - lo_[k]; }
  Point center() const;
  bool contains(const Point& p) const;

  friend bool operator==(const Bounds&, const Bounds&) = default;

 private:
  Point lo_;
  Point hi_;
};

}  // namespace flowmap
