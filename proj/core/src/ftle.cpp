#include "flowmap/ftle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowmap/error.hpp"

namespace flowmap {

double max_cauchy_green_eigenvalue(std::span<const double> F, int dim) {
  double c[3][3] = {};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += F[static_cast<std::size_t>(k * dim + a)] * F[static_cast<std::size_t>(k * dim + b)];
      c[a][b] = s;
    }
  if (dim == 2) {
    const double half_tr = 0.5 * (c[0][0] + c[1][1]);
    const double det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    return half_tr + std::sqrt(std::max(0.0, half_tr * half_tr - det));
  }
  // Symmetric 3x3: trigonometric closed form.
  const double p1 = c[0][1] * c[0][1] + c[0][2] * c[0][2] + c[1][2] * c[1][2];
  const double q = (c[0][0] + c[1][1] + c[2][2]) / 3.0;
  if (p1 == 0.0) return std::max({c[0][0], c[1][1], c[2][2]});
  const double p2 = (c[0][0] - q) * (c[0][0] - q) + (c[1][1] - q) * (c[1][1] - q) +
                    (c[2][2] - q) * (c[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  double b[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = (c[i][j] - (i == j ? q : 0.0)) / p;
  const double det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                       b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                       b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi);
}

FtleGrid ftle(const FlowMapSet& set, std::optional<int> cycle, std::optional<double> horizon) {
  const auto lat = detect_lattice(set.seeds);
  if (!lat) throw InvalidArgument("FTLE needs seeds on a regular lattice");
  const int dim = lat->dim;
  for (int a = 0; a < dim; ++a)
    if (lat->res[static_cast<std::size_t>(a)] < 2) throw InvalidArgument("FTLE needs >= 2 lattice nodes per axis");
  const int j = cycle.value_or(set.cycle_count() - 1);
  if (j < 0 || j >= set.cycle_count()) throw InvalidArgument("FTLE cycle out of range");
  const double T = horizon.value_or(static_cast<double>(j - set.map_start(j) + 1) * set.cfg.interval * set.cfg.step);
  if (T == 0.0) throw InvalidArgument("FTLE horizon must be nonzero");

  FtleGrid out;
  out.lattice = *lat;
  out.horizon = T;
  out.values.assign(lat->size(), 0.0);
  const auto& res = lat->res;
  for (int k = 0; k < res[2]; ++k)
    for (int jj = 0; jj < res[1]; ++jj)
      for (int i = 0; i < res[0]; ++i) {
        const int node[3] = {i, jj, k};
        double F[9] = {};
        bool ok = true;
        for (int b = 0; b < dim; ++b) {
          int lo[3] = {i, jj, k}, hi[3] = {i, jj, k};
          const int r = res[static_cast<std::size_t>(b)];
          lo[b] = std::max(node[b] - 1, 0);
          hi[b] = std::min(node[b] + 1, r - 1);
          const std::size_t ilo = lat->index(lo[0], lo[1], lo[2]);
          const std::size_t ihi = lat->index(hi[0], hi[1], hi[2]);
          if (!set.is_valid(ilo, j) || !set.is_valid(ihi, j)) ok = false;
          const double dX = set.seeds[ihi][b] - set.seeds[ilo][b];
          const Point& xl = set.end(ilo, j);
          const Point& xh = set.end(ihi, j);
          for (int a = 0; a < dim; ++a) F[a * dim + b] = (xh[a] - xl[a]) / dX;
        }
        const std::size_t idx = lat->index(i, jj, k);
        if (!ok) {
          out.values[idx] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const double lambda = max_cauchy_green_eigenvalue(std::span<const double>(F, static_cast<std::size_t>(dim * dim)), dim);
        out.values[idx] = 0.5 * std::log(std::max(lambda, std::numeric_limits<double>::min())) / std::abs(T);
      }
  return out;
}

FtleGrid ftle(const Field& field, std::span<const int> resolution, const Bounds& seed_bounds,
              const TraceConfig& cfg) {
  const SeedSet seeds = uniform_grid(resolution, seed_bounds);
  return ftle(extract_long(field, seeds, cfg));
}

}  // namespace flowmap
