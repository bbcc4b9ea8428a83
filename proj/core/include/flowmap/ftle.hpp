#pragma once

#include <optional>
#include <span>
#include <vector>

#include "flowmap/field.hpp"
#include "flowmap/flowmap.hpp"
#include "flowmap/lattice.hpp"

namespace flowmap {

/// FTLE sampled on the seed lattice, same ordering as the seeds. Nodes whose
/// difference stencil touches an invalid end location hold NaN.
struct FtleGrid {
  Lattice lattice;
  double horizon = 0.0;
  std::vector<double> values;

  double at(int i, int j, int k = 0) const { return values[lattice.index(i, j, k)]; }
};

/// FTLE = ln(sqrt(lambda_max(F^T F))) / |T| with F from central differences
/// of end locations (one-sided on lattice faces). `cycle` defaults to the
/// last file cycle; `horizon` defaults to the integration time of that cycle
/// within its map. Throws InvalidArgument if the seeds are not a lattice with
/// at least two nodes per axis.
FtleGrid ftle(const FlowMapSet& set, std::optional<int> cycle = std::nullopt,
              std::optional<double> horizon = std::nullopt);

/// Seeds a cell-centred lattice over `seed_bounds`, traces it, and returns the
/// FTLE of the last file cycle.
FtleGrid ftle(const Field& field, std::span<const int> resolution, const Bounds& seed_bounds,
              const TraceConfig& cfg);

/// Largest eigenvalue of the symmetric matrix F^T F for a dim x dim row-major F.
double max_cauchy_green_eigenvalue(std::span<const double> jacobian, int dim);

}  // namespace flowmap
