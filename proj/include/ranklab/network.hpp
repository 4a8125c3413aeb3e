#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ranklab {

struct DenseLayer {
  int in = 0;
  int out = 0;
  bool relu = false;  // ReLU applied to this layer's output

  bool operator==(const DenseLayer&) const = default;
};

/// Square-kernel valid-padding convolution, maps in_c channel planes to
/// out_c planes. Weight layout: [out_c][in_c][ky][kx], then out_c biases.
struct ConvLayer {
  int in_c = 0;
  int out_c = 0;
  int kernel = 0;
  int stride = 1;
  bool relu = false;

  int out_extent(int in_extent) const { return (in_extent - kernel) / stride + 1; }

  bool operator==(const ConvLayer&) const = default;
};

/// Optional convolutional stem followed by dense layers. An empty stem is a
/// plain dense stack over the flattened grid input (threshold networks use
/// 1 x q). Feature maps are stored channel-first, so the stem output flattens
/// to [c][h][w] for the first dense layer.
struct Architecture {
  int input_h = 0;
  int input_w = 0;
  std::vector<ConvLayer> stem;
  std::vector<DenseLayer> layers;

  int input_dim() const { return input_h * input_w; }
  int output_dim() const { return layers.back().out; }
  /// Width of the activations entering the final layer (the feature vector).
  int feature_dim() const { return layers.back().in; }
  int64_t param_count() const;

  void validate() const;  // throws on dimension mismatches

  /// Reference scoring network: flattened input -> 256 -> 128 -> K.
  static Architecture scoring(int input_h, int input_w, int label_count);
  /// Convolutional scoring network: three stride-2 convs -> 128 -> K.
  /// Needs input extents of at least 21 pixels.
  static Architecture conv_scoring(int input_h, int input_w, int label_count);
  /// Threshold network of the label-selection head: q -> 128 -> K.
  static Architecture threshold(int feature_dim, int label_count);

  bool operator==(const Architecture&) const = default;
};

enum class NetworkKind : uint8_t { scoring = 0, threshold = 1 };

/// Feed-forward network with a flat parameter vector and explicit
/// forward/backward. Stem layers come first in the vector, then dense layers
/// as row-major weights [out][in] followed by biases [out].
///
/// forward()/backward() keep a per-batch activation cache and are
/// single-writer; infer() is const and allocation-local, so trained networks
/// can be shared across threads.
class Mlp {
 public:
  Mlp(Architecture arch, NetworkKind kind);

  /// He-style uniform init: weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
  /// biases zero. Deterministic per seed.
  static Mlp init(Architecture arch, NetworkKind kind, uint64_t seed);

  const Architecture& arch() const { return arch_; }
  NetworkKind kind() const { return kind_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Batched forward pass; `inputs` holds batch rows of input_dim() values.
  /// Caches activations for backward.
  void forward(const std::vector<double>& inputs, int batch);
  /// Batch outputs (batch x output_dim), valid after forward().
  const std::vector<double>& outputs() const;
  /// Batch feature rows (batch x feature_dim), valid after forward().
  const std::vector<double>& features() const;
  /// Parameter gradient (summed over the batch) for d(loss)/d(outputs).
  /// Throws std::logic_error when no forward cache exists.
  std::vector<double> backward(const std::vector<double>& doutputs) const;

  /// Const single-input forward without touching the cache.
  void infer(const std::vector<double>& input, std::vector<double>* feature_out,
             std::vector<double>* output_out) const;
  /// Const batched forward without touching the cache.
  void infer_batch(const std::vector<double>& inputs, int batch,
                   std::vector<double>* features_out, std::vector<double>* outputs_out) const;

 private:
  void run_layers(const std::vector<double>& inputs, int batch,
                  std::vector<std::vector<double>>* activations) const;

  Architecture arch_;
  NetworkKind kind_;
  std::vector<double> params_;

  // forward cache: activations_[0] is the input batch, activations_[l] the
  // post-activation output of layer l-1.
  std::vector<std::vector<double>> activations_;
  int cache_batch_ = 0;
  bool has_cache_ = false;
};

/// Self-describing binary checkpoint: magic, format version, kind,
/// architecture, and the parameter array as little-endian 64-bit floats.
/// Round-trips bit-exactly.
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace ranklab
