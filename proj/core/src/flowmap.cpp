#include "flowmap/flowmap.hpp"

#include <cmath>
#include <json.hpp>
#include <variant>

#include "flowmap/error.hpp"
#include "flowmap/npy.hpp"
#include "flowmap/parallel.hpp"

namespace flowmap {
namespace {

using nlohmann::json;

json point_json(const Point& p) { return json(std::vector<double>(p.coords().begin(), p.coords().end())); }

Point point_from(const json& j) { return Point::from_span(j.get<std::vector<double>>()); }

FlowMapSet extract_maps(const Field& field, const SeedSet& seeds, TraceConfig cfg, int map_len,
                        ExtractionMethod method) {
  cfg.validate();
  const int n = cfg.file_cycles;
  if (map_len < 1 || n % map_len != 0)
    throw InvalidArgument("file cycles (" + std::to_string(n) + ") not divisible by samples per map (" +
                          std::to_string(map_len) + ")");
  const Bounds domain = field.domain();
  for (const auto& s : seeds.points)
    if (!domain.contains(s)) throw InvalidArgument("seed out of domain: " + s.str());

  FlowMapSet set;
  set.method = method;
  set.seeds = seeds.points;
  set.cfg = cfg;
  set.cfg.samples_per_map = method == ExtractionMethod::Hybrid ? map_len : (method == ExtractionMethod::Short ? 1 : n);
  set.bounds = domain;
  set.field = field.describe();
  for (int b = map_len; b < n; b += map_len) set.map_boundaries.push_back(b);

  const std::size_t m = seeds.points.size();
  set.ends.resize(m * static_cast<std::size_t>(n));
  set.valid.resize(m * static_cast<std::size_t>(n));
  // Dispatch on the concrete field so these traces are bit-identical to
  // reference_trajectories at the same step.
  std::visit(
      [&](const auto& f) {
        parallel_for(m, [&](std::size_t begin, std::size_t end) {
          std::vector<Point> pos;
          std::vector<std::uint8_t> ok;
          for (std::size_t i = begin; i < end; ++i) {
            pos.clear();
            ok.clear();
            for (int first = 0; first < n; first += map_len) {
              const long first_cycle = static_cast<long>(first) * cfg.interval;
              trace_into(f, domain, seeds.points[i], cfg, first_cycle, map_len, pos, ok);
            }
            std::copy(pos.begin(), pos.end(), set.ends.begin() + static_cast<std::ptrdiff_t>(i * n));
            std::copy(ok.begin(), ok.end(), set.valid.begin() + static_cast<std::ptrdiff_t>(i * n));
          }
        });
      },
      field.variant());
  return set;
}

}  // namespace

std::string to_string(ExtractionMethod m) {
  switch (m) {
    case ExtractionMethod::Long: return "long";
    case ExtractionMethod::Short: return "short";
    case ExtractionMethod::Hybrid: return "hybrid";
  }
  return "?";
}

ExtractionMethod parse_method(std::string_view s) {
  if (s == "long") return ExtractionMethod::Long;
  if (s == "short") return ExtractionMethod::Short;
  if (s == "hybrid") return ExtractionMethod::Hybrid;
  throw InvalidArgument("unknown extraction method '" + std::string(s) + "'");
}

int FlowMapSet::map_length() const {
  switch (method) {
    case ExtractionMethod::Long: return cfg.file_cycles;
    case ExtractionMethod::Short: return 1;
    case ExtractionMethod::Hybrid: return cfg.samples_per_map;
  }
  return cfg.file_cycles;
}

FlowMapSet extract_long(const Field& field, const SeedSet& seeds, const TraceConfig& cfg) {
  return extract_maps(field, seeds, cfg, cfg.file_cycles, ExtractionMethod::Long);
}

FlowMapSet extract_short(const Field& field, const SeedSet& seeds, const TraceConfig& cfg) {
  return extract_maps(field, seeds, cfg, 1, ExtractionMethod::Short);
}

FlowMapSet extract_hybrid(const Field& field, const SeedSet& seeds, const TraceConfig& cfg) {
  return extract_maps(field, seeds, cfg, cfg.samples_per_map, ExtractionMethod::Hybrid);
}

FlowMapSet extract(ExtractionMethod method, const Field& field, const SeedSet& seeds,
                   const TraceConfig& cfg) {
  switch (method) {
    case ExtractionMethod::Long: return extract_long(field, seeds, cfg);
    case ExtractionMethod::Short: return extract_short(field, seeds, cfg);
    case ExtractionMethod::Hybrid: return extract_hybrid(field, seeds, cfg);
  }
  throw InvalidArgument("unknown extraction method");
}

FlowMapSet extract_validation(const Field& field, const FlowMapSet& train, double fraction) {
  if (!(fraction > 0.0)) throw InvalidArgument("validation fraction must be positive");
  const std::size_t m = train.seed_count();
  const auto v = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m)));
  SeedSet all = sobol(train.dim(), m + v, field.domain());
  all.points.erase(all.points.begin(), all.points.begin() + static_cast<std::ptrdiff_t>(m));
  return extract(train.method, field, all, train.cfg);
}

std::vector<TrainingSample> to_training_samples(const FlowMapSet& set) {
  std::vector<TrainingSample> out;
  const int n = set.cycle_count();
  out.reserve(set.seed_count() * static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < set.seed_count(); ++i)
    for (int j = 0; j < n; ++j)
      out.push_back({set.seeds[i], j, set.end(i, j), set.is_valid(i, j)});
  return out;
}

FlowMapFiles flowmap_files(const std::filesystem::path& path) {
  FlowMapFiles f;
  f.ends = path;
  auto stem = path;
  stem.replace_extension();
  f.seeds = stem.string() + ".seeds.npy";
  f.valid = stem.string() + ".valid.npy";
  f.sidecar = stem.string() + ".json";
  return f;
}

std::uintmax_t flowmap_storage_bytes(const std::filesystem::path& path) {
  const auto f = flowmap_files(path);
  return std::filesystem::file_size(f.ends) + std::filesystem::file_size(f.seeds) +
         std::filesystem::file_size(f.valid) + std::filesystem::file_size(f.sidecar);
}

void write_flowmap(const FlowMapSet& set, const std::filesystem::path& path) {
  const auto files = flowmap_files(path);
  const auto m = set.seed_count();
  const auto n = static_cast<std::size_t>(set.cycle_count());
  const auto dim = static_cast<std::size_t>(set.dim());

  std::vector<double> ends;
  ends.reserve(m * n * dim);
  for (const auto& p : set.ends) ends.insert(ends.end(), p.coords().begin(), p.coords().end());
  std::vector<double> seeds;
  seeds.reserve(m * dim);
  for (const auto& p : set.seeds) seeds.insert(seeds.end(), p.coords().begin(), p.coords().end());

  const std::size_t ends_shape[] = {m, n, dim};
  const std::size_t seeds_shape[] = {m, dim};
  const std::size_t valid_shape[] = {m, n};
  npy::write(files.ends, ends_shape, ends);
  npy::write(files.seeds, seeds_shape, seeds);
  npy::write(files.valid, valid_shape, std::span<const std::uint8_t>(set.valid));

  json side = {
      {"format", "flowmap-set"},
      {"version", 1},
      {"method", to_string(set.method)},
      {"delta", set.cfg.step},
      {"interval", set.cfg.interval},
      {"p", set.cfg.samples_per_map},
      {"t0", set.cfg.t0},
      {"n_file_cycles", set.cfg.file_cycles},
      {"bounds", {point_json(set.bounds.lo()), point_json(set.bounds.hi())}},
      {"map_boundaries", set.map_boundaries},
      {"seeds_file", files.seeds.filename().string()},
      {"valid_file", files.valid.filename().string()},
      {"field", set.field},
  };
  npy::dump(files.sidecar, side.dump(2) + "\n");
}

FlowMapSet read_flowmap(const std::filesystem::path& path) {
  const auto files = flowmap_files(path);
  json side;
  try {
    side = json::parse(npy::slurp(files.sidecar));
  } catch (const json::exception& e) {
    throw ParseError(files.sidecar.string() + ": " + e.what());
  }
  FlowMapSet set;
  try {
    set.method = parse_method(side.at("method").get<std::string>());
    set.cfg.step = side.at("delta").get<double>();
    set.cfg.interval = side.at("interval").get<int>();
    set.cfg.samples_per_map = side.at("p").get<int>();
    set.cfg.t0 = side.at("t0").get<double>();
    set.bounds = Bounds(point_from(side.at("bounds").at(0)), point_from(side.at("bounds").at(1)));
    set.map_boundaries = side.value("map_boundaries", std::vector<int>{});
    set.field = side.value("field", std::string{});
  } catch (const json::exception& e) {
    throw ParseError(files.sidecar.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(files.sidecar.string() + ": " + e.what());
  }
  const auto dir = path.parent_path();
  const npy::Array ends = npy::read(path);
  const npy::Array seeds = npy::read(dir / side.at("seeds_file").get<std::string>());
  const npy::Array valid = npy::read(dir / side.value("valid_file", files.valid.filename().string()));
  if (ends.shape.size() != 3 || seeds.shape.size() != 2 || valid.shape.size() != 2)
    throw ParseError(path.string() + ": flow-map arrays have unexpected rank");
  const std::size_t m = ends.shape[0], n = ends.shape[1], dim = ends.shape[2];
  if (seeds.shape[0] != m || seeds.shape[1] != dim || valid.shape[0] != m || valid.shape[1] != n ||
      dim != static_cast<std::size_t>(set.bounds.dim()))
    throw ParseError(path.string() + ": flow-map arrays disagree on shape");
  set.cfg.file_cycles = static_cast<int>(n);

  const auto e = ends.to_doubles();
  const auto s = seeds.to_doubles();
  set.valid = valid.to_bools();
  set.ends.reserve(m * n);
  for (std::size_t i = 0; i < m * n; ++i)
    set.ends.push_back(Point::from_span(std::span<const double>(e).subspan(i * dim, dim)));
  set.seeds.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    set.seeds.push_back(Point::from_span(std::span<const double>(s).subspan(i * dim, dim)));
  return set;
}

}  // namespace flowmap
