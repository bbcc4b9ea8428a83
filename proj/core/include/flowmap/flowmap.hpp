#pragma once

// Flow-map extraction (long / short / hybrid) and persistence.
//
// A FlowMapSet holds m seeds and an m x n table of end locations, one per
// file cycle. Short and hybrid maps re-seed at the original seed locations at
// every map boundary, so row i always starts from seeds[i].

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flowmap/field.hpp"
#include "flowmap/point.hpp"
#include "flowmap/seeding.hpp"
#include "flowmap/tracer.hpp"

namespace flowmap {

enum class ExtractionMethod { Long, Short, Hybrid };

std::string to_string(ExtractionMethod m);
ExtractionMethod parse_method(std::string_view s);

struct FlowMapSet {
  ExtractionMethod method = ExtractionMethod::Long;
  std::vector<Point> seeds;          // m start locations
  std::vector<Point> ends;           // m * n, seed-major
  std::vector<std::uint8_t> valid;   // m * n
  TraceConfig cfg;
  Bounds bounds;
  std::vector<int> map_boundaries;   // file-cycle indices where resets occur
  std::string field;                 // Field::describe() of the source, if known

  std::size_t seed_count() const { return seeds.size(); }
  int cycle_count() const { return cfg.file_cycles; }
  int dim() const { return bounds.dim(); }
  const Point& end(std::size_t seed, int cycle) const {
    return ends[seed * static_cast<std::size_t>(cfg.file_cycles) + static_cast<std::size_t>(cycle)];
  }
  bool is_valid(std::size_t seed, int cycle) const {
    return valid[seed * static_cast<std::size_t>(cfg.file_cycles) + static_cast<std::size_t>(cycle)] != 0;
  }
  /// File cycles per map: n for long, 1 for short, p for hybrid.
  int map_length() const;
  /// First file cycle of the map that contains `cycle`.
  int map_start(int cycle) const { return cycle - cycle % map_length(); }

  friend bool operator==(const FlowMapSet&, const FlowMapSet&) = default;
};

FlowMapSet extract_long(const Field& field, const SeedSet& seeds, const TraceConfig& cfg);
FlowMapSet extract_short(const Field& field, const SeedSet& seeds, const TraceConfig& cfg);
/// Throws InvalidArgument unless file_cycles is divisible by samples_per_map.
FlowMapSet extract_hybrid(const Field& field, const SeedSet& seeds, const TraceConfig& cfg);
FlowMapSet extract(ExtractionMethod method, const Field& field, const SeedSet& seeds,
                   const TraceConfig& cfg);

/// Validation maps for a training set: the next ceil(fraction * m) Sobol
/// points after the first m, traced with the same method and configuration.
FlowMapSet extract_validation(const Field& field, const FlowMapSet& train, double fraction = 0.1);

/// One row of the training table {start, file cycle, end location}.
struct TrainingSample {
  Point start;
  int cycle = 0;
  Point target;
  bool valid = true;
};

/// m*n samples ordered seed-major then cycle-major.
std::vector<TrainingSample> to_training_samples(const FlowMapSet& set);

/// Writes `path` (ends, shape (m, n, dim), '<f8') plus the seeds NPY
/// (m, dim), the validity NPY (m, n) and a JSON sidecar.
void write_flowmap(const FlowMapSet& set, const std::filesystem::path& path);
FlowMapSet read_flowmap(const std::filesystem::path& path);

struct FlowMapFiles {
  std::filesystem::path ends, seeds, valid, sidecar;
};
FlowMapFiles flowmap_files(const std::filesystem::path& path);
/// Total bytes of every file that makes up a stored flow-map set.
std::uintmax_t flowmap_storage_bytes(const std::filesystem::path& path);

}  // namespace flowmap
