#pragma once

// 2D Delaunay triangulation (lexicographic sweep plus Lawson flips) and
// walking point location.

#include <array>
#include <span>
#include <vector>

#include "flowmap/point.hpp"

namespace flowmap {

inline constexpr int kOutside = -1;
inline constexpr int kNoNeighbor = -1;

/// Relative tolerance of the in-circle predicate.
inline constexpr double kIncircleTolerance = 1e-10;

/// > 0 when a, b, c turn counter-clockwise.
double orient2d(const Point& a, const Point& b, const Point& c);

/// Sign of the in-circle determinant for d against counter-clockwise a, b, c:
/// +1 strictly inside, -1 strictly outside, 0 cocircular within tolerance.
int incircle(const Point& a, const Point& b, const Point& c, const Point& d,
             double rel_tol = kIncircleTolerance);

struct Triangulation {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  /// neighbors[t][i] lies across the edge opposite triangles[t][i].
  std::vector<std::array<int, 3>> neighbors;

  std::size_t size() const { return triangles.size(); }
  /// Vertices on the convex hull (collinear boundary points included).
  std::size_t hull_vertex_count() const;
};

/// Throws InvalidArgument for fewer than 3 points, duplicates, non-2D input
/// or all-collinear input. Among cocircular configurations the diagonal whose
/// endpoints come first in (x, y) order is kept.
Triangulation triangulate(std::span<const Point> points);

/// Barycentric weights of p in triangle (a, b, c). Throws InvalidArgument
/// for a zero-area triangle.
std::array<double, 3> barycentric_weights(const Point& a, const Point& b, const Point& c, const Point& p);

/// True when p lies in triangle t (edges included, up to rounding).
bool triangle_contains(const Triangulation& tri, int t, const Point& p);

/// Exhaustive search; kOutside when no triangle contains p.
int locate_brute_force(const Triangulation& tri, const Point& p);

/// Walking point location that resumes from the previous answer. Not
/// thread-safe; give each worker its own Locator.
class Locator {
 public:
  explicit Locator(const Triangulation& tri) : tri_(&tri) {}
  int locate(const Point& p);

 private:
  const Triangulation* tri_;
  int last_ = 0;
};

inline int locate(const Triangulation& tri, const Point& p) { return Locator(tri).locate(p); }

}  // namespace flowmap
