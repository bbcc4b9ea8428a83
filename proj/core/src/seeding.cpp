#include "flowmap/seeding.hpp"

#include <cmath>
#include <random>

#include "flowmap/error.hpp"

namespace flowmap {
namespace {

// Joe-Kuo (new-joe-kuo-6.21201) rows for dimensions 2 and 3; dimension 1 is
// the van der Corput sequence.
struct DirectionRow {
  int degree;
  std::uint32_t coeffs;
  std::array<std::uint32_t, 2> m;
};
constexpr DirectionRow kRows[] = {{1, 0, {1, 0}}, {2, 1, {1, 3}}};

void check_dim(int dim, const Bounds& bounds) {
  if (dim < 2 || dim > 3) throw InvalidArgument("seeding supports dim 2 or 3");
  if (bounds.dim() != dim) throw InvalidArgument("seed bounds do not match dimension");
}

Point map_into(const std::array<double, 3>& u, int dim, const Bounds& b) {
  Point p(dim);
  for (int k = 0; k < dim; ++k) {
    double v = b.lo()[k] + u[static_cast<std::size_t>(k)] * b.extent(k);
    if (v <= b.lo()[k]) v = std::nextafter(b.lo()[k], b.hi()[k]);
    if (v >= b.hi()[k]) v = std::nextafter(b.hi()[k], b.lo()[k]);
    p[k] = v;
  }
  return p;
}

}  // namespace

std::string to_string(SeedStrategy s) {
  switch (s) {
    case SeedStrategy::Sobol: return "sobol";
    case SeedStrategy::Pseudorandom: return "random";
    case SeedStrategy::Grid: return "grid";
  }
  return "?";
}

double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

SobolSequence::SobolSequence(int dim) : dim_(dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("Sobol sequence supports dim <= 3");
  for (int k = 0; k < 32; ++k) direction_[0][static_cast<std::size_t>(k)] = 1u << (31 - k);
  for (int d = 1; d < dim; ++d) {
    const DirectionRow& row = kRows[d - 1];
    const int s = row.degree;
    std::array<std::uint32_t, 33> m{};
    for (int k = 1; k <= s; ++k) m[static_cast<std::size_t>(k)] = row.m[static_cast<std::size_t>(k - 1)];
    for (int k = s + 1; k <= 32; ++k) {
      std::uint32_t v = m[static_cast<std::size_t>(k - s)] ^ (m[static_cast<std::size_t>(k - s)] << s);
      for (int i = 1; i < s; ++i)
        if ((row.coeffs >> (s - 1 - i)) & 1u)
          v ^= m[static_cast<std::size_t>(k - i)] << i;
      m[static_cast<std::size_t>(k)] = v;
    }
    for (int k = 1; k <= 32; ++k)
      direction_[static_cast<std::size_t>(d)][static_cast<std::size_t>(k - 1)] =
          m[static_cast<std::size_t>(k)] << (32 - k);
  }
}

std::array<double, 3> SobolSequence::next() {
  std::array<double, 3> out{};
  if (index_ > 0) {
    // Gray-code update: flip the direction number at the lowest zero bit of index-1.
    std::uint32_t c = 0;
    std::uint32_t value = index_ - 1;
    while (value & 1u) {
      value >>= 1;
      ++c;
    }
    for (int d = 0; d < dim_; ++d)
      state_[static_cast<std::size_t>(d)] ^= direction_[static_cast<std::size_t>(d)][c];
  }
  for (int d = 0; d < dim_; ++d)
    out[static_cast<std::size_t>(d)] = static_cast<double>(state_[static_cast<std::size_t>(d)]) * 0x1.0p-32;
  ++index_;
  return out;
}

SeedSet sobol(int dim, std::size_t count, const Bounds& bounds) {
  check_dim(dim, bounds);
  if (count == 0) throw InvalidArgument("Sobol seeding needs count >= 1");
  SobolSequence seq(dim);
  seq.next();  // all-zeros point
  SeedSet set;
  set.strategy = SeedStrategy::Sobol;
  set.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) set.points.push_back(map_into(seq.next(), dim, bounds));
  return set;
}

SeedSet pseudorandom(int dim, std::size_t count, const Bounds& bounds, std::uint64_t rng_seed) {
  check_dim(dim, bounds);
  std::mt19937_64 gen(rng_seed);
  SeedSet set;
  set.strategy = SeedStrategy::Pseudorandom;
  set.rng_seed = rng_seed;
  set.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::array<double, 3> u{};
    for (int k = 0; k < dim; ++k) u[static_cast<std::size_t>(k)] = unit_open(gen());
    set.points.push_back(map_into(u, dim, bounds));
  }
  return set;
}

SeedSet uniform_grid(std::span<const int> resolution, const Bounds& bounds) {
  const int dim = static_cast<int>(resolution.size());
  check_dim(dim, bounds);
  for (int r : resolution)
    if (r < 1) throw InvalidArgument("grid resolution must be >= 1");
  SeedSet set;
  set.strategy = SeedStrategy::Grid;
  set.resolution = {1, 1, 1};
  for (int k = 0; k < dim; ++k) set.resolution[static_cast<std::size_t>(k)] = resolution[static_cast<std::size_t>(k)];
  const auto& r = set.resolution;
  for (int k = 0; k < r[2]; ++k)
    for (int j = 0; j < r[1]; ++j)
      for (int i = 0; i < r[0]; ++i) {
        const int idx[3] = {i, j, k};
        Point p(dim);
        for (int a = 0; a < dim; ++a)
          p[a] = bounds.lo()[a] + (idx[a] + 0.5) * bounds.extent(a) / r[static_cast<std::size_t>(a)];
        set.points.push_back(p);
      }
  return set;
}

}  // namespace flowmap
