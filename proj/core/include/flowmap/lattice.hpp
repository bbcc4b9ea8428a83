#pragma once

#include <array>
#include <optional>
#include <span>

#include "flowmap/point.hpp"

namespace flowmap {

/// A regular seed lattice in uniform_grid order (x index fastest).
struct Lattice {
  int dim = 2;
  std::array<int, 3> res{1, 1, 1};
  Point origin;                     // first node
  std::array<double, 3> spacing{};  // 0 along axes with a single node

  std::size_t size() const {
    return static_cast<std::size_t>(res[0]) * res[1] * res[2];
  }
  std::size_t index(int i, int j, int k = 0) const {
    return (static_cast<std::size_t>(k) * res[1] + j) * res[0] + i;
  }
  /// Upper corner of the node set.
  Point last() const;
};

/// Recognises `points` as a full lattice in uniform_grid order. Coordinates
/// must agree with origin + index * spacing to `rel_tol` of the spacing.
std::optional<Lattice> detect_lattice(std::span<const Point> points, double rel_tol = 1e-9);

}  // namespace flowmap
