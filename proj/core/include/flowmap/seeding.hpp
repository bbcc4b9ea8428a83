#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowmap/point.hpp"

namespace flowmap {

enum class SeedStrategy { Sobol, Pseudorandom, Grid };

std::string to_string(SeedStrategy s);

struct SeedSet {
  std::vector<Point> points;
  SeedStrategy strategy = SeedStrategy::Sobol;
  std::uint64_t rng_seed = 0;          // pseudorandom only
  std::array<int, 3> resolution{};     // grid only (x fastest)

  std::size_t size() const { return points.size(); }
};

/// Unscrambled Sobol sequence in [0,1)^dim with Joe-Kuo direction numbers,
/// generated in Gray-code order. Supports dim <= 3.
class SobolSequence {
 public:
  explicit SobolSequence(int dim);

  /// Returns the next point; the first call yields the all-zeros point.
  std::array<double, 3> next();
  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint32_t index_ = 0;
  std::array<std::uint32_t, 3> state_{};
  std::array<std::array<std::uint32_t, 32>, 3> direction_{};
};

/// First `count` Sobol points after the initial all-zeros point, mapped into
/// `bounds`. Throws InvalidArgument for dim > 3, count == 0, or a bounds/dim
/// mismatch.
SeedSet sobol(int dim, std::size_t count, const Bounds& bounds);

/// i.i.d. uniform points from a seeded 64-bit Mersenne Twister; identical
/// sets for identical rng_seed on every platform.
SeedSet pseudorandom(int dim, std::size_t count, const Bounds& bounds, std::uint64_t rng_seed);

/// Cell-centred lattice, x index fastest; count = product of resolutions.
SeedSet uniform_grid(std::span<const int> resolution, const Bounds& bounds);

/// Uniform double in (0, 1) from 53 random bits; shared by every RNG user.
double unit_open(std::uint64_t bits);

}  // namespace flowmap
