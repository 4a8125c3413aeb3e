#include "ranklab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranklab {

std::vector<LabelPair> enumerate_rank_pairs(const RankVector& ranks) {
  std::vector<LabelPair> pairs;
  const int k = ranks.size();
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v)
      if (ranks.rank(u) > ranks.rank(v)) pairs.push_back({u, v});
  return pairs;
}

PairBatch sample_rank_pairs(const RankVector& ranks, int budget, Rng& rng) {
  if (budget < 1) throw std::invalid_argument("sample_rank_pairs: budget must be >= 1");
  std::vector<LabelPair> eligible = enumerate_rank_pairs(ranks);
  const int n = static_cast<int>(eligible.size());
  if (budget >= n) return PairBatch{std::move(eligible), budget};
  // Partial Fisher-Yates: the first `budget` slots become a uniform sample
  // without replacement.
  for (int i = 0; i < budget; ++i) {
    int j = rng.uniform_int(i, n - 1);
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(budget);
  return PairBatch{std::move(eligible), budget};
}

LossResult lse_pairwise_loss(const ScoreVector& scores, const PairBatch& batch) {
  const int k = static_cast<int>(scores.size());
  for (const auto& p : batch.pairs) {
    if (p.high < 0 || p.high >= k || p.low < 0 || p.low >= k)
      throw std::invalid_argument("lse_pairwise_loss: pair index out of range");
  }
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("lse_pairwise_loss: non-finite score");

  LossResult out;
  out.grad.assign(k, 0.0);
  if (batch.pairs.empty()) return out;  // log(1 + 0) = 0

  // Stabilized log(exp(0) + sum exp(d_i)): factor out the largest exponent,
  // counting the implicit "1 +" term as exponent 0.
  std::vector<double> diffs(batch.pairs.size());
  double max_exp = 0.0;
  for (size_t i = 0; i < batch.pairs.size(); ++i) {
    diffs[i] = scores[batch.pairs[i].low] - scores[batch.pairs[i].high];
    max_exp = std::max(max_exp, diffs[i]);
  }
  double denom = std::exp(-max_exp);  // the "1 +" term
  for (double d : diffs) denom += std::exp(d - max_exp);
  out.value = max_exp + std::log(denom);
  for (size_t i = 0; i < batch.pairs.size(); ++i) {
    double w = std::exp(diffs[i] - max_exp) / denom;  // exp(d_i) / (1 + S)
    out.grad[batch.pairs[i].low] += w;
    out.grad[batch.pairs[i].high] -= w;
  }
  return out;
}

LossResult cross_entropy_loss(const ScoreVector& scores, const PositiveSet& positives) {
  const int k = static_cast<int>(scores.size());
  if (positives.empty())
    throw std::invalid_argument("cross_entropy_loss: empty positive set (uniform target undefined)");
  for (int j : positives.members)
    if (j < 0 || j >= k) throw std::invalid_argument("cross_entropy_loss: label index out of range");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("cross_entropy_loss: non-finite score");

  // Softmax with max subtraction.
  double max_s = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - max_s);
  double log_z = max_s + std::log(z);

  const double inv_p = 1.0 / static_cast<double>(positives.size());
  LossResult out;
  out.grad.assign(k, 0.0);
  for (int j : positives.members) {
    out.value -= inv_p * (scores[j] - log_z);
    out.grad[j] -= inv_p;
  }
  // d(log_z)/d(s_k) = softmax_k; summed over the |P| target terms.
  for (int j = 0; j < k; ++j) out.grad[j] += std::exp(scores[j] - max_s) / z;
  return out;
}

}  // namespace ranklab
