#include "flowmap/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "flowmap/error.hpp"

namespace flowmap {
namespace {

// Canonical layer index -> chain and position; the consuming layer reads
// the chain's output starting at input row `row_offset`.
template <class Model>
struct Slot {
  decltype(&std::declval<Model&>().decoder) chain;
  std::size_t pos;
  int row_offset;

  auto& layer() const { return (*chain)[pos]; }
  auto& widths(MlpModel& m) const {
    if (chain == &m.pos_encoder) return m.arch.pos_widths;
    if (chain == &m.cycle_encoder) return m.arch.cycle_widths;
    return m.arch.dec_widths;
  }
};

template <class Model>
Slot<Model> slot_of(Model& m, std::size_t layer) {
  const std::size_t np = m.pos_encoder.size(), nc = m.cycle_encoder.size();
  if (layer < np) return {&m.pos_encoder, layer, 0};
  if (layer < np + nc) return {&m.cycle_encoder, layer - np, 0};
  if (layer + 1 < np + nc + m.decoder.size()) return {&m.decoder, layer - np - nc, 0};
  throw InvalidArgument("layer " + std::to_string(layer) + " is not prunable");
}

template <class Model>
auto& consumer_of(Model& m, Slot<Model>& s) {
  if (s.pos + 1 < s.chain->size()) return (*s.chain)[s.pos + 1];
  if (s.chain == &m.cycle_encoder) s.row_offset = m.pos_encoder.back().out;
  return m.decoder.front();
}

std::size_t prunable_count(const MlpModel& m) { return m.layers().size() - 1; }

}  // namespace

void PruneConfig::validate() const {
  if (!(target_fraction >= 0.0 && target_fraction < 1.0))
    throw InvalidArgument("prune target fraction must lie in [0, 1)");
  if (rounds < 1) throw InvalidArgument("prune rounds must be >= 1");
  if (finetune_epochs_per_round < 0 || final_finetune_epochs < 0)
    throw InvalidArgument("fine-tune epochs must be >= 0");
}

std::size_t hidden_neuron_count(const MlpModel& model) {
  std::size_t n = 0;
  const auto layers = model.layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) n += static_cast<std::size_t>(layers[i]->out);
  return n;
}

std::vector<double> neuron_scores(const MlpModel& model, std::size_t layer) {
  auto s = slot_of(model, layer);
  const Layer& l = s.layer();
  const Layer& next = consumer_of(model, s);
  std::vector<double> score(static_cast<std::size_t>(l.out), 0.0);
  for (int j = 0; j < l.out; ++j) {
    double acc = std::abs(l.bias[static_cast<std::size_t>(j)]);
    for (int i = 0; i < l.in; ++i) acc += std::abs(l.weight[static_cast<std::size_t>(i * l.out + j)]);
    const std::size_t row = static_cast<std::size_t>(s.row_offset + j) * static_cast<std::size_t>(next.out);
    for (int k = 0; k < next.out; ++k) acc += std::abs(next.weight[row + static_cast<std::size_t>(k)]);
    score[static_cast<std::size_t>(j)] = acc;
  }
  return score;
}

void remove_neurons(MlpModel& model, std::size_t layer, std::vector<int> neurons) {
  if (neurons.empty()) return;
  auto s = slot_of(model, layer);
  Layer& l = s.layer();
  Layer& n = consumer_of(model, s);
  std::sort(neurons.begin(), neurons.end());
  neurons.erase(std::unique(neurons.begin(), neurons.end()), neurons.end());
  if (neurons.front() < 0 || neurons.back() >= l.out)
    throw InvalidArgument("neuron index out of range");
  if (static_cast<int>(neurons.size()) >= l.out)
    throw InvalidArgument("pruning would empty layer " + std::to_string(layer));

  std::vector<char> drop(static_cast<std::size_t>(l.out), 0);
  for (int j : neurons) drop[static_cast<std::size_t>(j)] = 1;
  const int new_out = l.out - static_cast<int>(neurons.size());

  std::vector<double> w, b;
  w.reserve(static_cast<std::size_t>(l.in * new_out));
  for (int i = 0; i < l.in; ++i)
    for (int j = 0; j < l.out; ++j)
      if (!drop[static_cast<std::size_t>(j)]) w.push_back(l.weight[static_cast<std::size_t>(i * l.out + j)]);
  for (int j = 0; j < l.out; ++j)
    if (!drop[static_cast<std::size_t>(j)]) b.push_back(l.bias[static_cast<std::size_t>(j)]);

  std::vector<double> nw;
  nw.reserve(static_cast<std::size_t>((n.in - static_cast<int>(neurons.size())) * n.out));
  for (int r = 0; r < n.in; ++r) {
    const int local = r - s.row_offset;
    if (local >= 0 && local < l.out && drop[static_cast<std::size_t>(local)]) continue;
    const auto begin = n.weight.begin() + static_cast<std::ptrdiff_t>(r) * n.out;
    nw.insert(nw.end(), begin, begin + n.out);
  }
  l.weight = std::move(w);
  l.bias = std::move(b);
  l.out = new_out;
  n.in -= static_cast<int>(neurons.size());
  n.weight = std::move(nw);
  s.widths(model)[s.pos] = new_out;
}

PruneResult prune(const MlpModel& model, const Dataset& data, const Dataset& val, const PruneConfig& cfg) {
  cfg.validate();
  PruneResult res;
  res.model = model;
  res.params_before = model.parameter_count();
  const std::size_t np = prunable_count(model);
  const auto layers = model.layers();
  std::vector<int> original(np);
  for (std::size_t i = 0; i < np; ++i) {
    original[i] = layers[i]->out;
    res.kept.emplace_back(static_cast<std::size_t>(original[i]));
    std::iota(res.kept.back().begin(), res.kept.back().end(), 0);
  }
  for (std::size_t i = 0; i < np; ++i)
    if (std::llround(original[i] * cfg.target_fraction) >= original[i])
      throw InvalidArgument("pruning would empty layer " + std::to_string(i));

  if (cfg.target_fraction == 0.0) {
    res.params_after = res.params_before;
    return res;
  }
  for (int round = 1; round <= cfg.rounds; ++round) {
    const double share = cfg.target_fraction * round / cfg.rounds;
    for (std::size_t i = 0; i < np; ++i) {
      const auto goal = static_cast<int>(std::llround(original[i] * share));
      const int current_removed = original[i] - static_cast<int>(res.kept[i].size());
      const int k = goal - current_removed;
      if (k <= 0) continue;
      const auto score = neuron_scores(res.model, i);
      std::vector<int> idx(score.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return score[static_cast<std::size_t>(a)] < score[static_cast<std::size_t>(b)];
      });
      idx.resize(static_cast<std::size_t>(k));
      remove_neurons(res.model, i, idx);
      std::vector<char> drop(res.kept[i].size(), 0);
      for (int j : idx) drop[static_cast<std::size_t>(j)] = 1;
      std::vector<int> kept;
      for (std::size_t j = 0; j < drop.size(); ++j)
        if (!drop[j]) kept.push_back(res.kept[i][j]);
      res.kept[i] = std::move(kept);
    }
    int epochs = cfg.finetune_epochs_per_round + (round == cfg.rounds ? cfg.final_finetune_epochs : 0);
    if (epochs > 0) {
      TrainConfig tc = cfg.finetune;
      tc.epochs = epochs;
      tc.rng_seed = cfg.finetune.rng_seed + static_cast<std::uint64_t>(round);
      res.finetune.push_back(train(res.model, data, val, tc));
    }
  }
  res.params_after = res.model.parameter_count();
  return res;
}

MlpModel zero_padded(const MlpModel& pruned, const KeptNeurons& kept, const MlpArch& original) {
  MlpModel dense = pruned;
  dense.arch = original;
  dense.pos_encoder.clear();
  dense.cycle_encoder.clear();
  dense.decoder.clear();
  const auto src = pruned.layers();
  if (kept.size() + 1 != src.size()) throw InvalidArgument("kept-neuron table does not match model");

  std::vector<int> widths;
  for (int w : original.pos_widths) widths.push_back(w);
  for (int w : original.cycle_widths) widths.push_back(w);
  for (int w : original.dec_widths) widths.push_back(w);
  widths.push_back(original.dim);

  const std::size_t np = original.pos_widths.size(), nc = original.cycle_widths.size();
  // Input rows of each layer map back to original indices.
  auto input_map = [&](std::size_t li) -> std::pair<std::vector<int>, int> {
    std::vector<int> rows;
    int in_width;
    if (li == 0) {
      in_width = original.dim;
      for (int i = 0; i < in_width; ++i) rows.push_back(i);
    } else if (li == np) {
      in_width = 1;
      rows.push_back(0);
    } else if (li == np + nc) {
      in_width = original.latent();
      for (int r : kept[np - 1]) rows.push_back(r);
      for (int r : kept[np + nc - 1]) rows.push_back(original.pos_widths.back() + r);
    } else {
      in_width = widths[li - 1];
      rows = kept[li - 1];
    }
    return {rows, in_width};
  };
  for (std::size_t li = 0; li < src.size(); ++li) {
    const Layer& s = *src[li];
    auto [rows, in_width] = input_map(li);
    std::vector<int> cols;
    if (li < kept.size()) cols = kept[li];
    else for (int j = 0; j < original.dim; ++j) cols.push_back(j);
    Layer d;
    d.in = in_width;
    d.out = widths[li];
    d.kind = s.kind;
    d.omega = s.omega;
    d.weight.assign(static_cast<std::size_t>(d.in * d.out), 0.0);
    d.bias.assign(static_cast<std::size_t>(d.out), 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      d.bias[static_cast<std::size_t>(cols[c])] = s.bias[c];
      for (std::size_t r = 0; r < rows.size(); ++r)
        d.weight[static_cast<std::size_t>(rows[r] * d.out + cols[c])] = s.weight[r * cols.size() + c];
    }
    if (li < np) dense.pos_encoder.push_back(std::move(d));
    else if (li < np + nc) dense.cycle_encoder.push_back(std::move(d));
    else dense.decoder.push_back(std::move(d));
  }
  return dense;
}

}  // namespace flowmap
