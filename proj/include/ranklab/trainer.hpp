#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranklab/core.hpp"
#include "ranklab/network.hpp"

namespace ranklab {

enum class LossKind { cross_entropy, lsep, rlsep };

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);
/// Whether the loss trains on the binarized (positive/negative) ranks.
bool loss_binarizes(LossKind kind);

/// Scoring backbone family: the convolutional stem generalizes across digit
/// positions; the dense reference stack is kept for small inputs and as the
/// hand-checkable baseline.
enum class ArchKind { dense, conv };

const char* arch_kind_name(ArchKind kind);
ArchKind arch_kind_from_name(const std::string& name);

struct TrainConfig {
  LossKind loss = LossKind::rlsep;
  ArchKind arch = ArchKind::conv;
  int batch_size = 64;
  int max_epochs = 300;
  int patience = 20;
  int pair_budget = 1000;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  int input_size = 56;  // images are resampled to input_size x input_size
  uint64_t seed = 0;

  void validate() const;
  /// The scoring backbone this config trains.
  Architecture scoring_architecture(int label_count) const;
  /// Canonical flag rendering, hashed into report digests.
  std::string canonical_string() const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_ranked_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;          // 1-based argmin of validation loss
  int skipped_instances = 0;   // all-negative instances a CE run had to drop
};

/// History CSV: a commented header capturing the full config, then one row
/// per epoch. Identical seeds and inputs produce identical bytes.
std::string history_csv(const TrainHistory& history, const TrainConfig& cfg,
                        const std::string& dataset_digest);

struct ScoringTrainResult {
  Mlp net;
  TrainHistory history;
};

/// Minibatch training of the scoring network with per-step pair resampling
/// and early stopping on validation loss; returns the parameters from the
/// best validation epoch.
ScoringTrainResult train_scoring(const RankedDataset& data, const TrainConfig& cfg);

struct ThresholdTrainResult {
  Mlp net;
  TrainHistory history;
};

/// Trains the threshold network on frozen scoring features with binary
/// cross entropy against the binarized ranks. A zero-epoch budget returns
/// the freshly initialized network.
ThresholdTrainResult train_threshold(const Mlp& scoring, const RankedDataset& data,
                                     const TrainConfig& cfg);

struct Prediction {
  int label = 0;
  double score = 0.0;
};

/// Positive labels (score strictly above the predicted threshold), sorted
/// by score descending.
std::vector<Prediction> predict(const Mlp& scoring, const Mlp& threshold, const Image8& image);

}  // namespace ranklab
