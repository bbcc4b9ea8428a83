#include "flowmap/point.hpp"

#include <cmath>
#include <sstream>

#include "flowmap/error.hpp"

namespace flowmap {

Point::Point(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("point dimension must be 1..3");
}

Point::Point(std::initializer_list<double> coords) : Point(static_cast<int>(coords.size())) {
  std::size_t k = 0;
  for (double v : coords) c_[k++] = v;
}

Point Point::from_span(std::span<const double> coords) {
  Point p(static_cast<int>(coords.size()));
  for (std::size_t k = 0; k < coords.size(); ++k) p.c_[k] = coords[k];
  return p;
}

bool Point::finite() const {
  for (int k = 0; k < dim_; ++k)
    if (!std::isfinite(c_[static_cast<std::size_t>(k)])) return false;
  return true;
}

std::string Point::str() const {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int k = 0; k < dim_; ++k) os << (k ? ", " : "") << (*this)[k];
  os << ')';
  return os.str();
}

Point& Point::operator+=(const Point& o) {
  for (int k = 0; k < dim_; ++k) (*this)[k] += o[k];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  for (int k = 0; k < dim_; ++k) (*this)[k] -= o[k];
  return *this;
}

Point& Point::operator*=(double s) {
  for (int k = 0; k < dim_; ++k) (*this)[k] *= s;
  return *this;
}

bool operator==(const Point& a, const Point& b) {
  if (a.dim_ != b.dim_) return false;
  for (int k = 0; k < a.dim_; ++k)
    if (a[k] != b[k]) return false;
  return true;
}

double euclidean_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

Bounds::Bounds(Point lo, Point hi) : lo_(lo), hi_(hi) {
  if (lo.dim() != hi.dim() || lo.dim() < 2) throw InvalidArgument("bounds need matching dim >= 2");
  for (int k = 0; k < lo.dim(); ++k)
    if (!(lo[k] < hi[k])) throw InvalidArgument("bounds require min < max on every axis");
}

Point Bounds::center() const { return (lo_ + hi_) * 0.5; }

bool Bounds::contains(const Point& p) const {
  if (p.dim() != dim()) return false;
  for (int k = 0; k < p.dim(); ++k)
    if (!(p[k] >= lo_[k] && p[k] <= hi_[k])) return false;
  return true;
}

}  // namespace flowmap
