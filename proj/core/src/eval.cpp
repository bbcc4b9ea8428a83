#include "flowmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>

#include "flowmap/error.hpp"
#include "flowmap/inference.hpp"
#include "flowmap/parallel.hpp"

namespace flowmap {

TrajectoryError trajectory_error(const Trajectory& pred, const Trajectory& truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("trajectories differ in length");
  TrajectoryError e;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (!pred.valid[j] || !truth.valid[j]) continue;
    const Point& a = pred.positions[j];
    const Point& b = truth.positions[j];
    if (a.dim() != b.dim()) throw InvalidArgument("trajectories differ in dimension");
    double l1 = 0.0, sq = 0.0;
    for (int k = 0; k < a.dim(); ++k) {
      const double d = a[k] - b[k];
      l1 += std::abs(d);
      sq += d * d;
    }
    e.l1 += l1 / a.dim();
    e.euclid += std::sqrt(sq);
    ++e.n_valid;
  }
  if (e.n_valid > 0) {
    e.l1 /= e.n_valid;
    e.euclid /= e.n_valid;
  }
  return e;
}

ErrorStats error_stats(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("error_stats of an empty list");
  std::vector<double> v(errors.begin(), errors.end());
  std::sort(v.begin(), v.end());
  ErrorStats s;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.median = v[(v.size() - 1) / 2];
  return s;
}

ErrorReport evaluate(std::span<const Trajectory> pred, std::span<const Trajectory> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("prediction and truth counts differ");
  ErrorReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto e = trajectory_error(pred[i], truth[i]);
    if (!e.defined()) {
      ++r.excluded_invalid;
      continue;
    }
    r.per_seed.push_back(e.l1);
    r.per_seed_euclid.push_back(e.euclid);
  }
  if (!r.per_seed.empty()) {
    r.l1 = error_stats(r.per_seed);
    r.euclid = error_stats(r.per_seed_euclid);
  }
  return r;
}

std::vector<Trajectory> reference_trajectories(const Field& field, std::span<const Point> seeds,
                                               const TraceConfig& cfg, int refine) {
  if (refine < 1) throw InvalidArgument("refinement factor must be >= 1");
  TraceConfig fine = cfg;
  fine.step = cfg.step / refine;
  fine.interval = cfg.interval * refine;
  fine.validate();
  const Bounds domain = field.domain();
  std::vector<Trajectory> out(seeds.size());
  std::visit(
      [&](const auto& f) {
        parallel_for(seeds.size(), [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) {
            Trajectory& tr = out[i];
            tr.seed = seeds[i];
            if (seeds[i].dim() != domain.dim() || !domain.contains(seeds[i])) {
              tr.positions.assign(static_cast<std::size_t>(cfg.file_cycles), seeds[i]);
              tr.valid.assign(static_cast<std::size_t>(cfg.file_cycles), 0);
              continue;
            }
            trace_into(f, domain, seeds[i], fine, 0, fine.file_cycles, tr.positions, tr.valid);
          }
        }, 8);
      },
      field.variant());
  return out;
}

ErrorReport noise_floor(const Field& field, std::span<const Point> seeds, const TraceConfig& cfg,
                        std::span<const Trajectory> truth) {
  return evaluate(reference_trajectories(field, seeds, cfg, 1), truth);
}

ErrorReport evaluate_model(const MlpModel& model, std::span<const Point> seeds,
                           std::span<const Trajectory> truth) {
  return evaluate(infer_trajectories(model, seeds), truth);
}

}  // namespace flowmap
