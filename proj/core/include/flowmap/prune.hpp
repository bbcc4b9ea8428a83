#pragma once

// Structured magnitude pruning: whole hidden neurons are removed (matrices
// physically shrink), followed by fine-tuning. The output layer is never
// touched.

#include <vector>

#include "flowmap/mlp.hpp"
#include "flowmap/train.hpp"

namespace flowmap {

struct PruneConfig {
  double target_fraction = 0.35;     // of hidden neurons removed in total
  int rounds = 5;                    // removal is spread evenly over rounds
  int finetune_epochs_per_round = 5;
  int final_finetune_epochs = 0;     // extra epochs after the last round
  TrainConfig finetune;              // epochs field is ignored

  void validate() const;
};

/// Number of hidden neurons (outputs of every layer except the output layer).
std::size_t hidden_neuron_count(const MlpModel& model);

/// Score of every neuron of prunable layer `layer` (canonical order): L1 norm
/// of its incoming weights and bias plus its outgoing weights.
std::vector<double> neuron_scores(const MlpModel& model, std::size_t layer);

/// Removes the given neurons of prunable layer `layer` (canonical index) and
/// the matching rows of the consuming layer. Throws if the layer would empty.
void remove_neurons(MlpModel& model, std::size_t layer, std::vector<int> neurons);

/// Original neuron indices still present, per prunable layer.
using KeptNeurons = std::vector<std::vector<int>>;

struct PruneResult {
  MlpModel model;
  KeptNeurons kept;
  std::size_t params_before = 0;
  std::size_t params_after = 0;
  std::vector<TrainHistory> finetune;  // one per round
};

/// Iterative prune-and-finetune until target_fraction of hidden neurons are
/// gone. Each layer loses the same share of its original width.
PruneResult prune(const MlpModel& model, const Dataset& data, const Dataset& val, const PruneConfig& cfg);

/// Dense model with the original widths in which every removed neuron has
/// zero incoming weights, bias and outgoing weights.
MlpModel zero_padded(const MlpModel& pruned, const KeptNeurons& kept, const MlpArch& original);

}  // namespace flowmap
