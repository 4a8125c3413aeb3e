#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ranklab/image.hpp"

namespace ranklab {

/// The set of all possible labels.
struct LabelSpace {
  int size = 0;
  std::vector<std::string> names;  // empty, or exactly `size` distinct entries

  explicit LabelSpace(int k, std::vector<std::string> label_names = {});
};

/// Dense per-label ordinal ranks. Rank 0 marks the least-important
/// (negative) labels; higher rank means more important; only the order
/// carries meaning.
///
/// Density rule: the distinct values form a contiguous block {0..m}, or
/// {1..m} when every label is positive (rank 0 appears iff some label is
/// absent or least-important).
class RankVector {
 public:
  explicit RankVector(std::vector<int> ranks);

  int size() const { return static_cast<int>(ranks_.size()); }
  int rank(int label) const { return ranks_[label]; }
  const std::vector<int>& values() const { return ranks_; }
  int max_rank() const;
  bool is_binary() const;  // every rank in {0, 1}

  bool operator==(const RankVector&) const = default;

 private:
  std::vector<int> ranks_;
};

/// Label indices (0-based) whose rank is positive.
struct PositiveSet {
  std::vector<int> members;  // sorted ascending

  bool contains(int label) const;
  size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }

  bool operator==(const PositiveSet&) const = default;
};

/// Latent importances; not-present labels carry no value.
using Importances = std::vector<std::optional<double>>;

/// Rank assignment from latent importance values: absent labels get rank 0,
/// present labels are ranked by importance tier, consecutively from 1.
/// Equal importances share a rank.
RankVector assign_ranks(const Importances& importances);

/// Positive labels of a rank vector (rank > 0).
PositiveSet binarize(const RankVector& ranks);

/// The 0/1 rank vector of the positive set; this is how the LSEP pair
/// source is expressed in terms of the ranked sampler.
RankVector binary_ranks(const RankVector& ranks);

struct Instance {
  int64_t id = 0;
  Image8 image;
  RankVector ranks;
  Importances importances;  // empty when unknown

  Instance(int64_t instance_id, Image8 img, RankVector r, Importances imp = {})
      : id(instance_id), image(std::move(img)), ranks(std::move(r)), importances(std::move(imp)) {}
};

/// Checks rank/importance consistency; throws std::invalid_argument on
/// violation. No-op when the instance has no importances.
void validate_instance(const Instance& instance);

struct Provenance {
  uint64_t seed = 0;
  std::string config_digest;
};

enum class Split { train, val, test };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct RankedDataset {
  LabelSpace space;
  std::vector<Instance> train;
  std::vector<Instance> val;
  std::vector<Instance> test;
  Provenance provenance;

  const std::vector<Instance>& split(Split s) const;
};

}  // namespace ranklab
