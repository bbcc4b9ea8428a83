#include "flowmap/inference.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "flowmap/error.hpp"

namespace flowmap {

std::vector<Trajectory> infer_trajectories(const MlpModel& model, std::span<const Point> seeds,
                                           std::span<const int> cycles) {
  const int n = model.n_file_cycles();
  std::vector<int> wanted(cycles.begin(), cycles.end());
  if (wanted.empty()) {
    wanted.resize(static_cast<std::size_t>(n));
    std::iota(wanted.begin(), wanted.end(), 0);
  }
  for (int c : wanted)
    if (c < 0 || c >= n)
      throw InvalidArgument("cycle " + std::to_string(c) + " out of range [0, " + std::to_string(n - 1) + "]");

  const auto dim = static_cast<std::size_t>(model.dim());
  std::vector<Trajectory> out(seeds.size());
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i].dim() != model.dim())
      throw InvalidArgument("seed " + seeds[i].str() + " does not match model dimension");
    out[i].seed = seeds[i];
    out[i].positions.assign(wanted.size(), seeds[i]);
    out[i].valid.assign(wanted.size(), 0);
    if (seeds[i].finite() && model.norm.bounds.contains(seeds[i])) live.push_back(i);
  }
  if (live.empty() || wanted.empty()) return out;

  const int len = model.map_length();
  const int last_map = *std::max_element(wanted.begin(), wanted.end()) / len;
  std::vector<Point> starts;
  for (std::size_t i : live) starts.push_back(seeds[i]);
  std::vector<char> alive(live.size(), 1);
  const Bounds& box = model.norm.bounds;

  std::vector<double> pos(live.size() * dim);
  for (int k = 0; k <= last_map; ++k) {
    // Cycles evaluated in this map: requested ones plus the chaining cycle.
    std::vector<int> local;
    for (int c : wanted)
      if (c / len == k) local.push_back(c);
    const int chain_cycle = (k + 1) * len - 1;
    const bool need_chain = k < last_map;
    if (need_chain) local.push_back(chain_cycle);
    if (local.empty()) continue;
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end()), local.end());

    std::vector<double> cyc(local.size());
    for (std::size_t c = 0; c < local.size(); ++c) cyc[c] = model.norm.cycle(local[c]);
    for (std::size_t s = 0; s < starts.size(); ++s) model.norm.to_unit(starts[s], pos.data() + s * dim);
    const auto pred = predict_grid_unit(model, pos, cyc);

    auto column = [&](int cycle) {
      return static_cast<std::size_t>(std::lower_bound(local.begin(), local.end(), cycle) - local.begin());
    };
    for (std::size_t w = 0; w < wanted.size(); ++w) {
      if (wanted[w] / len != k) continue;
      const std::size_t c = column(wanted[w]);
      for (std::size_t s = 0; s < live.size(); ++s) {
        if (!alive[s]) {
          out[live[s]].positions[w] = starts[s];
          continue;
        }
        out[live[s]].positions[w] = model.norm.from_unit(pred.data() + (s * local.size() + c) * dim);
        out[live[s]].valid[w] = 1;
      }
    }
    if (need_chain) {
      const std::size_t c = column(chain_cycle);
      // Next map starts from the predicted position, pulled back into the
      // domain; a non-finite prediction ends the trajectory.
      for (std::size_t s = 0; s < live.size(); ++s) {
        if (!alive[s]) continue;
        Point p = model.norm.from_unit(pred.data() + (s * local.size() + c) * dim);
        if (!p.finite()) {
          alive[s] = 0;
          continue;
        }
        for (int a = 0; a < p.dim(); ++a) p[a] = std::clamp(p[a], box.lo()[a], box.hi()[a]);
        starts[s] = p;
      }
    }
  }
  return out;
}

Trajectory infer_trajectory(const MlpModel& model, const Point& seed, std::span<const int> cycles) {
  return std::move(infer_trajectories(model, std::span<const Point>(&seed, 1), cycles).front());
}

}  // namespace flowmap
