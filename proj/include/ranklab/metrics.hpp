#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ranklab/core.hpp"
#include "ranklab/losses.hpp"

namespace ranklab {

/// Pairwise confusion counts over the unique-pair set of one instance
/// (pairs u < v with unequal ranks; equal-rank pairs are excluded).
struct PairConfusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }

  bool operator==(const PairConfusion&) const = default;
};

/// Ground truth for a pair (u, v), u < v, is positive iff rank_u > rank_v;
/// the prediction is positive iff score_u > score_v (strict; score ties
/// predict negative).
PairConfusion pair_confusion(const RankVector& ranks, const ScoreVector& scores);

struct InstanceMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool exact = false;  // no false positives and no false negatives
};

InstanceMetrics metrics_from_confusion(const PairConfusion& c);

/// Whether the instance has at least one unequal-rank pair; instances
/// without one are excluded from ranked aggregation.
bool has_eligible_pairs(const RankVector& ranks);

/// Throws std::invalid_argument when no eligible pair exists.
InstanceMetrics ranked_instance_metrics(const RankVector& ranks, const ScoreVector& scores);

/// Ranked average precision with iterative rank reduction: evaluate ranked
/// precision, zero out the smallest non-zero rank tier, repeat; both the
/// initial state and the final single-tier state are included in the mean.
/// Throws std::invalid_argument on an all-zero rank vector.
double ranked_average_precision(const RankVector& ranks, const ScoreVector& scores);

/// Label-set metrics against the full label space (tn counts the labels in
/// neither set; accuracy is label-wise over K).
InstanceMetrics unranked_instance_metrics(const PositiveSet& truth, const PositiveSet& predicted,
                                          int label_count);

/// One evaluated instance; parts that could not be computed stay empty.
struct InstanceRecord {
  std::optional<InstanceMetrics> ranked;
  std::optional<double> average_precision;
  std::optional<InstanceMetrics> unranked;
};

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

/// Per-instance means (and stds) over a split, plus exclusion bookkeeping.
struct MetricReport {
  MetricStat ranked_precision, ranked_recall, ranked_f1, ranked_accuracy, ranked_exact, ranked_map;
  MetricStat unranked_precision, unranked_recall, unranked_f1, unranked_accuracy, unranked_exact;
  int instances = 0;
  int ranked_excluded = 0;  // instances with no eligible pair
  int map_excluded = 0;     // all-zero rank vectors

  /// Flat key-value text: name<TAB>mean<TAB>std<TAB>n.
  std::string to_kv() const;
  /// Two labeled CSV rows (ranked / unranked), percentages with one decimal.
  static std::string csv_header();
  std::string to_csv_rows(const std::string& method) const;
};

MetricReport aggregate_report(const std::vector<InstanceRecord>& records);

}  // namespace ranklab
