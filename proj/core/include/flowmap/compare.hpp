#pragma once

// Head-to-head timing, storage and accuracy comparison of a learned model
// against barycentric (or lattice) reconstruction from a basis flow map.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowmap/eval.hpp"
#include "flowmap/field.hpp"

namespace flowmap {

struct CompareConfig {
  std::vector<int> seed_counts{100, 200, 300, 400, 500, 1000};
  int repetitions = 5;          // timings report the median
  std::size_t error_seeds = 500;
  std::uint64_t rng_seed = 2024;
  int refine = 10;
  bool prefer_lattice = false;  // lattice baseline instead of barycentric
};

struct MethodResult {
  std::string name;
  std::uintmax_t storage_bytes = 0;
  double load_s = 0.0;
  double build_s = 0.0;                  // triangulation; 0 for the model
  std::vector<double> query_s;           // one per seed count
  ErrorReport errors;
};

struct ComparisonReport {
  std::string field;
  int dim = 2;
  int n_cycles = 0;
  std::vector<int> seed_counts;
  int repetitions = 0;
  int workers = 1;
  std::string baseline_kind;             // "barycentric" or "lattice"
  std::vector<MethodResult> methods;     // model first, then baseline
  ErrorReport noise_floor;
};

ComparisonReport compare(const std::filesystem::path& model_path, const std::filesystem::path& basis_path,
                         const Field& field, const CompareConfig& cfg);

std::string report_json(const ComparisonReport& report);
/// One row per (method, seed count) plus error summaries.
std::string report_csv(const ComparisonReport& report);
/// Problems found when checking a JSON report against the documented
/// schema; empty when valid.
std::vector<std::string> validate_report_json(const std::string& text);

}  // namespace flowmap
