#include "flowmap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace flowmap {

Point Lattice::last() const {
  Point p = origin;
  for (int a = 0; a < dim; ++a) p[a] += spacing[static_cast<std::size_t>(a)] * (res[static_cast<std::size_t>(a)] - 1);
  return p;
}

std::optional<Lattice> detect_lattice(std::span<const Point> points, double rel_tol) {
  if (points.empty()) return std::nullopt;
  const int dim = points.front().dim();
  if (dim < 2 || dim > 3) return std::nullopt;

  Lattice lat;
  lat.dim = dim;
  lat.origin = points.front();
  // Walk the ordering: x varies fastest, so the run length along x gives nx.
  const auto same = [&](double a, double b, double scale) {
    return std::abs(a - b) <= rel_tol * std::max(scale, 1e-300);
  };
  double extent_scale = 0.0;
  for (const auto& p : points)
    for (int a = 0; a < dim; ++a) extent_scale = std::max(extent_scale, std::abs(p[a] - lat.origin[a]));
  if (extent_scale == 0.0) extent_scale = 1.0;

  std::size_t nx = 1;
  while (nx < points.size() && same(points[nx][1], lat.origin[1], extent_scale) &&
         (dim == 2 || same(points[nx][2], lat.origin[2], extent_scale)))
    ++nx;
  std::size_t ny = 1;
  while (ny * nx < points.size() && (dim == 2 || same(points[ny * nx][2], lat.origin[2], extent_scale)))
    ++ny;
  if (dim == 2) {
    // In 2D the run along y covers the whole remainder.
    if (points.size() % nx != 0) return std::nullopt;
    ny = points.size() / nx;
  }
  const std::size_t nz = dim == 3 ? points.size() / (nx * ny) : 1;
  if (nx * ny * nz != points.size()) return std::nullopt;
  lat.res = {static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)};
  if (nx > 1) lat.spacing[0] = (points[nx - 1][0] - lat.origin[0]) / static_cast<double>(nx - 1);
  if (ny > 1) lat.spacing[1] = (points[(ny - 1) * nx][1] - lat.origin[1]) / static_cast<double>(ny - 1);
  if (nz > 1) lat.spacing[2] = (points[(nz - 1) * nx * ny][2] - lat.origin[2]) / static_cast<double>(nz - 1);
  for (int a = 0; a < dim; ++a)
    if (lat.res[static_cast<std::size_t>(a)] > 1 && !(lat.spacing[static_cast<std::size_t>(a)] > 0.0))
      return std::nullopt;

  double tol_scale = 0.0;
  for (int a = 0; a < dim; ++a) tol_scale = std::max(tol_scale, lat.spacing[static_cast<std::size_t>(a)]);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const Point& p = points[lat.index(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k))];
        const std::size_t idx[3] = {i, j, k};
        for (int a = 0; a < dim; ++a) {
          const double want = lat.origin[a] + lat.spacing[static_cast<std::size_t>(a)] * static_cast<double>(idx[a]);
          if (!same(p[a], want, tol_scale)) return std::nullopt;
        }
      }
  return lat;
}

}  // namespace flowmap
