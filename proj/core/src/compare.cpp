#include "flowmap/compare.hpp"

#include <algorithm>
#include <chrono>
#include <json.hpp>
#include <sstream>

#include "flowmap/error.hpp"
#include "flowmap/flowmap.hpp"
#include "flowmap/inference.hpp"
#include "flowmap/model_io.hpp"
#include "flowmap/parallel.hpp"
#include "flowmap/reconstruct.hpp"
#include "flowmap/seeding.hpp"

namespace flowmap {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

template <class Fn>
double median_seconds(int reps, Fn&& fn) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[(t.size() - 1) / 2];
}

json stats_json(const ErrorStats& s) {
  return {{"count", s.count}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"median", s.median}};
}

json errors_json(const ErrorReport& r) {
  return {{"l1", stats_json(r.l1)}, {"euclid", stats_json(r.euclid)}, {"excluded_invalid", r.excluded_invalid}};
}

}  // namespace

ComparisonReport compare(const std::filesystem::path& model_path, const std::filesystem::path& basis_path,
                         const Field& field, const CompareConfig& cfg) {
  if (cfg.repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  if (cfg.seed_counts.empty()) throw InvalidArgument("no seed counts given");
  for (int c : cfg.seed_counts)
    if (c < 1) throw InvalidArgument("seed counts must be positive");
  for (const auto& p : {model_path, basis_path})
    if (!std::filesystem::exists(p)) throw InvalidArgument("missing artifact " + p.string());

  ComparisonReport rep;
  rep.field = field.describe();
  rep.dim = field.dim();
  rep.seed_counts = cfg.seed_counts;
  rep.repetitions = cfg.repetitions;
  rep.workers = worker_count();

  MlpModel model;
  MethodResult dl;
  dl.name = "model";
  dl.storage_bytes = std::filesystem::file_size(model_path);
  dl.load_s = median_seconds(cfg.repetitions, [&] { model = load_model(model_path); });

  FlowMapSet basis;
  MethodResult bc;
  bc.storage_bytes = flowmap_storage_bytes(basis_path);
  bc.load_s = median_seconds(cfg.repetitions, [&] { basis = read_flowmap(basis_path); });
  if (basis.cycle_count() != model.n_file_cycles())
    throw InvalidArgument("model and basis disagree on the number of file cycles");
  if (basis.dim() != model.dim() || basis.dim() != field.dim())
    throw InvalidArgument("model, basis and field disagree on dimension");
  rep.n_cycles = basis.cycle_count();

  const bool lattice_mode = cfg.prefer_lattice || basis.dim() == 3;
  rep.baseline_kind = lattice_mode ? "lattice" : "barycentric";
  bc.name = rep.baseline_kind;
  Triangulation tri;
  Lattice lattice;
  bc.build_s = median_seconds(cfg.repetitions, [&] {
    if (lattice_mode) {
      auto l = detect_lattice(basis.seeds);
      if (!l) throw InvalidArgument("basis seeds do not form a lattice");
      lattice = *l;
    } else {
      tri = triangulate(basis.seeds);
    }
  });
  auto baseline = [&](std::span<const Point> seeds) {
    return lattice_mode ? lattice_reconstruct_all(basis, lattice, seeds) : bc_reconstruct_all(basis, tri, seeds);
  };

  const Bounds domain = field.domain();
  for (int count : cfg.seed_counts) {
    const auto seeds = pseudorandom(rep.dim, static_cast<std::size_t>(count), domain,
                                    cfg.rng_seed + static_cast<std::uint64_t>(count));
    dl.query_s.push_back(median_seconds(cfg.repetitions, [&] { (void)infer_trajectories(model, seeds.points); }));
    bc.query_s.push_back(median_seconds(cfg.repetitions, [&] { (void)baseline(seeds.points); }));
  }

  if (cfg.error_seeds > 0) {
    const auto test = pseudorandom(rep.dim, cfg.error_seeds, domain, cfg.rng_seed);
    const auto truth = reference_trajectories(field, test.points, basis.cfg, cfg.refine);
    dl.errors = evaluate(infer_trajectories(model, test.points), truth);
    bc.errors = evaluate(baseline(test.points), truth);
    rep.noise_floor = noise_floor(field, test.points, basis.cfg, truth);
  }
  rep.methods = {dl, bc};
  return rep;
}

std::string report_json(const ComparisonReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods) {
    json q = json::array();
    for (std::size_t i = 0; i < m.query_s.size(); ++i)
      q.push_back({{"seeds", r.seed_counts[i]}, {"seconds", m.query_s[i]}});
    methods.push_back({{"name", m.name},
                       {"storage_bytes", m.storage_bytes},
                       {"phases", {{"load_s", m.load_s}, {"build_s", m.build_s}}},
                       {"query", q},
                       {"errors", errors_json(m.errors)}});
  }
  json j = {{"format", "flowmap-comparison"},
            {"version", 1},
            {"field", r.field},
            {"dim", r.dim},
            {"n_cycles", r.n_cycles},
            {"seed_counts", r.seed_counts},
            {"repetitions", r.repetitions},
            {"workers", r.workers},
            {"baseline", r.baseline_kind},
            {"methods", methods},
            {"noise_floor", errors_json(r.noise_floor)}};
  return j.dump(2) + "\n";
}

std::string report_csv(const ComparisonReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "method,metric,seeds,value\n";
  for (const auto& m : r.methods) {
    os << m.name << ",storage_bytes,," << m.storage_bytes << '\n';
    os << m.name << ",load_s,," << m.load_s << '\n';
    os << m.name << ",build_s,," << m.build_s << '\n';
    for (std::size_t i = 0; i < m.query_s.size(); ++i)
      os << m.name << ",query_s," << r.seed_counts[i] << ',' << m.query_s[i] << '\n';
    os << m.name << ",error_l1_median,," << m.errors.l1.median << '\n';
    os << m.name << ",error_l1_mean,," << m.errors.l1.mean << '\n';
    os << m.name << ",error_l1_max,," << m.errors.l1.max << '\n';
    os << m.name << ",error_euclid_median,," << m.errors.euclid.median << '\n';
    os << m.name << ",excluded_invalid,," << m.errors.excluded_invalid << '\n';
  }
  os << "noise_floor,error_l1_median,," << r.noise_floor.l1.median << '\n';
  return os.str();
}

std::vector<std::string> validate_report_json(const std::string& text) {
  std::vector<std::string> problems;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto need = [&](const json& obj, const std::string& where, const std::string& key, auto check,
                  const char* type) -> bool {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!check(obj.at(key))) {
      problems.push_back(where + "." + key + ": expected " + type);
      return false;
    }
    return true;
  };
  const auto is_str = [](const json& v) { return v.is_string(); };
  const auto is_uint = [](const json& v) { return v.is_number_unsigned(); };
  const auto is_nonneg = [](const json& v) { return v.is_number() && v.get<double>() >= 0.0; };
  const auto is_arr = [](const json& v) { return v.is_array(); };
  const auto is_obj = [](const json& v) { return v.is_object(); };

  auto check_stats = [&](const json& s, const std::string& where) {
    for (const char* k : {"min", "max", "mean", "median"}) need(s, where, k, is_nonneg, "number >= 0");
    need(s, where, "count", is_uint, "unsigned integer");
    if (s.is_object() && s.contains("max") && s.contains("mean") && s.at("max").is_number() &&
        s.at("mean").is_number() && s.at("max").get<double>() < s.at("mean").get<double>())
      problems.push_back(where + ": max < mean");
  };
  auto check_errors = [&](const json& e, const std::string& where) {
    if (need(e, where, "l1", is_obj, "object")) check_stats(e.at("l1"), where + ".l1");
    if (need(e, where, "euclid", is_obj, "object")) check_stats(e.at("euclid"), where + ".euclid");
    need(e, where, "excluded_invalid", is_uint, "unsigned integer");
  };

  if (!j.is_object()) return {"report must be an object"};
  if (need(j, "report", "format", is_str, "string") && j.at("format") != "flowmap-comparison")
    problems.push_back("report.format: expected 'flowmap-comparison'");
  need(j, "report", "version", is_uint, "unsigned integer");
  need(j, "report", "field", is_str, "string");
  need(j, "report", "dim", is_uint, "unsigned integer");
  need(j, "report", "n_cycles", is_uint, "unsigned integer");
  need(j, "report", "repetitions", is_uint, "unsigned integer");
  need(j, "report", "workers", is_uint, "unsigned integer");
  need(j, "report", "baseline", is_str, "string");
  std::size_t n_counts = 0;
  if (need(j, "report", "seed_counts", is_arr, "array")) {
    n_counts = j.at("seed_counts").size();
    for (const auto& c : j.at("seed_counts"))
      if (!c.is_number_unsigned()) problems.push_back("report.seed_counts: entries must be unsigned");
  }
  if (need(j, "report", "methods", is_arr, "array")) {
    if (j.at("methods").size() < 2) problems.push_back("report.methods: expected model and baseline entries");
    std::size_t i = 0;
    for (const auto& m : j.at("methods")) {
      const std::string where = "methods[" + std::to_string(i++) + "]";
      need(m, where, "name", is_str, "string");
      need(m, where, "storage_bytes", is_uint, "unsigned integer");
      if (need(m, where, "phases", is_obj, "object")) {
        need(m.at("phases"), where + ".phases", "load_s", is_nonneg, "number >= 0");
        need(m.at("phases"), where + ".phases", "build_s", is_nonneg, "number >= 0");
      }
      if (need(m, where, "query", is_arr, "array")) {
        if (m.at("query").size() != n_counts) problems.push_back(where + ".query: one entry per seed count");
        for (const auto& q : m.at("query")) {
          need(q, where + ".query", "seeds", is_uint, "unsigned integer");
          need(q, where + ".query", "seconds", is_nonneg, "number >= 0");
        }
      }
      if (need(m, where, "errors", is_obj, "object")) check_errors(m.at("errors"), where + ".errors");
    }
  }
  if (need(j, "report", "noise_floor", is_obj, "object")) check_errors(j.at("noise_floor"), "noise_floor");
  return problems;
}

}  // namespace flowmap
