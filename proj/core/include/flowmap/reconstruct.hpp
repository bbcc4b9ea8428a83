#pragma once

// Post hoc reconstruction of new trajectories from a stored basis flow map:
// barycentric interpolation over a Delaunay triangulation of the basis seeds
// (2D) and multilinear interpolation over a seed lattice (2D/3D).
//
// For short and hybrid bases each map is interpolated from the original
// seeds; the position reconstructed at the last cycle of a map becomes the
// query location for the next map.

#include <optional>
#include <span>
#include <vector>

#include "flowmap/delaunay.hpp"
#include "flowmap/flowmap.hpp"
#include "flowmap/lattice.hpp"
#include "flowmap/tracer.hpp"

namespace flowmap {

/// Interpolates one trajectory; cycles outside the hull, or whose three
/// basis vertices are not all valid, are flagged invalid (and stay so).
Trajectory bc_reconstruct(const FlowMapSet& basis, const Triangulation& tri, const Point& seed);
Trajectory bc_reconstruct(const FlowMapSet& basis, const Triangulation& tri, const Point& seed,
                          Locator& locator);

/// Same as bc_reconstruct for every seed, parallel over seeds with one
/// Locator per worker chunk.
std::vector<Trajectory> bc_reconstruct_all(const FlowMapSet& basis, const Triangulation& tri,
                                           std::span<const Point> seeds);

/// Multilinear interpolation over a basis seeded on a full lattice. Queries
/// outside the lattice box are invalid.
Trajectory lattice_reconstruct(const FlowMapSet& basis, const Lattice& lattice, const Point& seed);
std::vector<Trajectory> lattice_reconstruct_all(const FlowMapSet& basis, const Lattice& lattice,
                                                std::span<const Point> seeds);

struct BcTimings {
  double load_s = 0.0;
  double triangulate_s = 0.0;
  double interpolate_s = 0.0;
};

/// Loads a basis from disk, triangulates (2D) or detects its lattice, then
/// reconstructs `seeds`, timing each phase.
struct BaselineRun {
  FlowMapSet basis;
  std::optional<Triangulation> tri;
  std::optional<Lattice> lattice;
  std::vector<Trajectory> trajectories;
  BcTimings timings;
};
BaselineRun run_baseline(const std::filesystem::path& basis_path, std::span<const Point> seeds,
                         bool prefer_lattice = false);

}  // namespace flowmap
