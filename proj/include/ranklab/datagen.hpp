#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ranklab/core.hpp"
#include "ranklab/rng.hpp"

namespace ranklab {

/// Decoded IDX tensor: big-endian magic (ubyte element type), one big-endian
/// 32-bit size per dimension, then the row-major payload.
struct IdxTensor {
  std::vector<int> dims;
  std::vector<uint8_t> payload;
};

/// Throws std::runtime_error naming the byte offset of the problem.
IdxTensor parse_idx(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_idx(const std::vector<int>& dims, const std::vector<uint8_t>& payload);

/// Per-class 28x28 digit images, tagged by their source split.
struct DigitPool {
  std::array<std::vector<Image8>, 10> classes;
  std::string source;

  bool complete() const;  // every class has at least one image
};

DigitPool pool_from_tensors(const IdxTensor& images, const IdxTensor& labels, std::string tag);
DigitPool load_digit_pool(const std::string& images_path, const std::string& labels_path,
                          std::string tag);

struct GenConfig {
  int canvas_size = 224;
  int digits_min = 3;
  int digits_max = 6;
  double scale_low = 1.0;
  double scale_high = 4.0;
  int train_count = 60000;
  int val_count = 10000;
  int test_count = 10000;
  uint64_t seed = 0;

  static GenConfig paper();  // the full-scale §5.1-style setup
  static GenConfig desk();   // canvas 112, digits 3-4, scales U(1,3), 5000/500/500

  void validate() const;
  std::string canonical_string() const;
  std::string digest() const;
};

/// Where one digit ended up on the canvas (bounding boxes are square).
struct DigitPlacement {
  int cls = 0;
  double scale = 0.0;
  int x = 0;
  int y = 0;
  int side = 0;
};

/// One composed canvas: distinct digit classes at uniform scales, placed
/// uniformly at random without bounding-box overlap (100 attempts per digit,
/// then the whole instance restarts). Importances are the scale factors.
/// Throws a generation error naming the config when placement keeps failing.
Instance compose_instance(const DigitPool& pool, const GenConfig& cfg, int64_t id, Rng& rng,
                          std::vector<DigitPlacement>* layout = nullptr);

/// Full dataset generation; train instances draw digits from `train_pool`,
/// val/test instances from `eval_pool`. Pure function of (pools, config).
RankedDataset generate_ranked_mnist(const GenConfig& cfg, const DigitPool& train_pool,
                                    const DigitPool& eval_pool);

struct CalibConfig {
  int canvas_size = 224;
  std::vector<double> scales = {1.0, 2.0, 3.0, 4.0};
  int count = 10000;
  uint64_t seed = 0;

  static CalibConfig paper();
  static CalibConfig desk();  // canvas 112, scales {1,2,3}, 1000 images

  void validate() const;
  std::string canonical_string() const;
  std::string digest() const;
};

/// Calibration set: every instance holds one digit per configured scale,
/// distinct classes, class-to-scale assignment randomized per instance.
/// Digits are placed largest-first; when the fixed scales make zero-overlap
/// placement impossible (e.g. scales {1,2,3} on a 112 canvas) the digit takes
/// the candidate position with the least bounding-box overlap instead, which
/// the max compositing keeps well-defined. Instances land in the test split.
RankedDataset generate_calibration_set(const DigitPool& pool, const CalibConfig& cfg);

/// On-disk layout: <dir>/<split>/NNNNNN.pgm plus <dir>/manifest.tsv with
/// tab-separated records (id, split, path, K, K ranks, K importances with -1
/// for absent, seed) and <dir>/meta.txt carrying the provenance.
void save_dataset(const RankedDataset& data, const std::string& dir);
RankedDataset load_dataset(const std::string& dir);

/// The exact manifest bytes save_dataset writes (deterministic).
std::string manifest_text(const RankedDataset& data);

}  // namespace ranklab
