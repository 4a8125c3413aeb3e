#pragma once

#include <vector>

#include "ranklab/core.hpp"
#include "ranklab/rng.hpp"

namespace ranklab {

/// Raw label scores f(x; theta), one real per label.
using ScoreVector = std::vector<double>;

/// Ordered label pair: `high` is the more-important side (rank strictly
/// greater than `low`'s).
struct LabelPair {
  int high = 0;
  int low = 0;

  bool operator==(const LabelPair&) const = default;
};

/// Sampled pair subset; |pairs| = min(budget, eligible pair count).
struct PairBatch {
  std::vector<LabelPair> pairs;
  int budget = 0;
};

/// Loss value with its gradient w.r.t. the score vector.
struct LossResult {
  double value = 0.0;
  std::vector<double> grad;
};

/// Uniform random subset (without replacement) of the eligible pair set
/// {(u, v) | rank_u > rank_v}. Budgets at or above the eligible count return
/// the full set in canonical enumeration order. Sampling on binary_ranks()
/// of a rank vector yields the positive-vs-negative pair source.
PairBatch sample_rank_pairs(const RankVector& ranks, int budget, Rng& rng);

/// All eligible pairs in canonical order (high-major, then low).
std::vector<LabelPair> enumerate_rank_pairs(const RankVector& ranks);

/// log(1 + sum exp(score_low - score_high)) over the batch, with its
/// analytic gradient. The inner sum is evaluated with the max exponent
/// factored out, so score gaps up to +-500 stay finite. The same functional
/// form serves both the positive/negative and the fully ranked pair source.
LossResult lse_pairwise_loss(const ScoreVector& scores, const PairBatch& batch);

/// Mean negative log softmax probability over the positive set, with its
/// analytic gradient. The positive set must be non-empty (the uniform
/// target 1/|positives| is undefined otherwise).
LossResult cross_entropy_loss(const ScoreVector& scores, const PositiveSet& positives);

}  // namespace ranklab
