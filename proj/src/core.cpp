#include "ranklab/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace ranklab {

LabelSpace::LabelSpace(int k, std::vector<std::string> label_names)
    : size(k), names(std::move(label_names)) {
  if (k < 2) throw std::invalid_argument("LabelSpace: K must be >= 2");
  if (!names.empty()) {
    if (static_cast<int>(names.size()) != k)
      throw std::invalid_argument("LabelSpace: names must have exactly K entries");
    std::set<std::string> distinct(names.begin(), names.end());
    if (static_cast<int>(distinct.size()) != k)
      throw std::invalid_argument("LabelSpace: names must be distinct");
  }
}

RankVector::RankVector(std::vector<int> ranks) : ranks_(std::move(ranks)) {
  if (ranks_.empty()) throw std::invalid_argument("RankVector: empty");
  std::set<int> distinct;
  for (int r : ranks_) {
    if (r < 0) throw std::invalid_argument("RankVector: negative rank");
    distinct.insert(r);
  }
  // Contiguity: {0..m}, or {1..m} when no label has rank 0.
  int lo = *distinct.begin();
  int hi = *distinct.rbegin();
  if (lo > 1) throw std::invalid_argument("RankVector: ranks must start at 0 or 1");
  if (static_cast<int>(distinct.size()) != hi - lo + 1)
    throw std::invalid_argument("RankVector: ranks must be dense (no gaps)");
}

int RankVector::max_rank() const { return *std::max_element(ranks_.begin(), ranks_.end()); }

bool RankVector::is_binary() const {
  return std::all_of(ranks_.begin(), ranks_.end(), [](int r) { return r == 0 || r == 1; });
}

bool PositiveSet::contains(int label) const {
  return std::binary_search(members.begin(), members.end(), label);
}

RankVector assign_ranks(const Importances& importances) {
  if (importances.empty()) throw std::invalid_argument("assign_ranks: empty importance sequence");
  // Collect distinct importance tiers among present labels.
  std::map<double, int> tier_rank;
  for (const auto& s : importances) {
    if (!s.has_value()) continue;
    if (!std::isfinite(*s)) throw std::invalid_argument("assign_ranks: non-finite importance");
    tier_rank[*s] = 0;
  }
  int next = 1;
  for (auto& [importance, rank] : tier_rank) rank = next++;  // ascending tiers get 1, 2, ...
  std::vector<int> ranks(importances.size(), 0);
  for (size_t j = 0; j < importances.size(); ++j)
    if (importances[j].has_value()) ranks[j] = tier_rank[*importances[j]];
  return RankVector(std::move(ranks));
}

PositiveSet binarize(const RankVector& ranks) {
  PositiveSet out;
  for (int j = 0; j < ranks.size(); ++j)
    if (ranks.rank(j) > 0) out.members.push_back(j);
  return out;
}

RankVector binary_ranks(const RankVector& ranks) {
  std::vector<int> out(ranks.values().size());
  for (size_t j = 0; j < out.size(); ++j) out[j] = ranks.values()[j] > 0 ? 1 : 0;
  return RankVector(std::move(out));
}

void validate_instance(const Instance& instance) {
  if (instance.importances.empty()) return;
  if (instance.importances.size() != static_cast<size_t>(instance.ranks.size()))
    throw std::invalid_argument("instance: importances/ranks length mismatch");
  const auto& imp = instance.importances;
  const auto& r = instance.ranks;
  for (int j = 0; j < r.size(); ++j) {
    if (!imp[j].has_value() && r.rank(j) != 0)
      throw std::invalid_argument("instance: not-present label with non-zero rank");
  }
  for (int u = 0; u < r.size(); ++u) {
    if (!imp[u].has_value()) continue;
    for (int v = 0; v < r.size(); ++v) {
      if (!imp[v].has_value()) continue;
      if (*imp[u] > *imp[v] && !(r.rank(u) > r.rank(v)))
        throw std::invalid_argument("instance: importance order not reflected in ranks");
      if (*imp[u] == *imp[v] && r.rank(u) != r.rank(v))
        throw std::invalid_argument("instance: tied importances with unequal ranks");
    }
  }
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split name: " + name);
}

const std::vector<Instance>& RankedDataset::split(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return train;
}

}  // namespace ranklab
