#include "ranklab/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ranklab/rng.hpp"
#include "ranklab/util.hpp"

namespace ranklab {

namespace {

struct PlaneDims {
  int c = 1;
  int h = 0;
  int w = 0;
};

// Channel dimensions entering each stem layer; dims[i] feeds stem[i], the
// last entry is the stem output (== flat input of the dense tail).
std::vector<PlaneDims> stem_dims(const Architecture& arch) {
  std::vector<PlaneDims> dims;
  dims.push_back({1, arch.input_h, arch.input_w});
  for (const auto& l : arch.stem)
    dims.push_back({l.out_c, l.out_extent(dims.back().h), l.out_extent(dims.back().w)});
  return dims;
}

// Gathers conv patches: col[p][q] with p = oy*ow+ox and q = (ic*k+ky)*k+kx.
void im2col(const double* x, int c, int h, int w, int k, int stride, int oh, int ow, double* col) {
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      double* row = col + (static_cast<size_t>(oy) * ow + ox) * (static_cast<size_t>(c) * k * k);
      for (int ic = 0; ic < c; ++ic) {
        const double* plane = x + static_cast<size_t>(ic) * h * w;
        for (int ky = 0; ky < k; ++ky) {
          const double* src = plane + static_cast<size_t>(oy * stride + ky) * w +
                              static_cast<size_t>(ox) * stride;
          for (int kx = 0; kx < k; ++kx) *row++ = src[kx];
        }
      }
    }
}

// Scatter-adds patch gradients back onto the input plane stack.
void col2im_add(const double* col, int c, int h, int w, int k, int stride, int oh, int ow,
                double* dx) {
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const double* row =
          col + (static_cast<size_t>(oy) * ow + ox) * (static_cast<size_t>(c) * k * k);
      for (int ic = 0; ic < c; ++ic) {
        double* plane = dx + static_cast<size_t>(ic) * h * w;
        for (int ky = 0; ky < k; ++ky) {
          double* dst =
              plane + static_cast<size_t>(oy * stride + ky) * w + static_cast<size_t>(ox) * stride;
          for (int kx = 0; kx < k; ++kx) dst[kx] += *row++;
        }
      }
    }
}

}  // namespace

int64_t Architecture::param_count() const {
  int64_t n = 0;
  for (const auto& c : stem)
    n += static_cast<int64_t>(c.out_c) * c.in_c * c.kernel * c.kernel + c.out_c;
  for (const auto& l : layers) n += static_cast<int64_t>(l.in) * l.out + l.out;
  return n;
}

void Architecture::validate() const {
  if (input_h <= 0 || input_w <= 0) throw std::invalid_argument("architecture: bad input dims");
  if (layers.empty()) throw std::invalid_argument("architecture: no layers");
  int c = 1, h = input_h, w = input_w;
  for (const auto& l : stem) {
    if (l.in_c != c || l.out_c <= 0 || l.kernel < 1 || l.stride < 1)
      throw std::invalid_argument("architecture: mismatched conv layer");
    if (l.kernel > h || l.kernel > w)
      throw std::invalid_argument("architecture: conv kernel exceeds its input extent");
    h = l.out_extent(h);
    w = l.out_extent(w);
    c = l.out_c;
  }
  int expect = c * h * w;  // equals input_dim() when the stem is empty
  for (const auto& l : layers) {
    if (l.in != expect || l.out <= 0)
      throw std::invalid_argument("architecture: mismatched layer dimensions");
    expect = l.out;
  }
}

Architecture Architecture::scoring(int input_h, int input_w, int label_count) {
  Architecture a;
  a.input_h = input_h;
  a.input_w = input_w;
  a.layers = {{input_h * input_w, 256, true}, {256, 128, true}, {128, label_count, false}};
  a.validate();
  return a;
}

Architecture Architecture::conv_scoring(int input_h, int input_w, int label_count) {
  Architecture a;
  a.input_h = input_h;
  a.input_w = input_w;
  a.stem = {{1, 8, 5, 2, true}, {8, 16, 5, 2, true}, {16, 32, 3, 2, true}};
  int h = input_h, w = input_w;
  for (const auto& l : a.stem) {
    h = l.out_extent(h);
    w = l.out_extent(w);
  }
  a.layers = {{32 * h * w, 128, true}, {128, label_count, false}};
  a.validate();
  return a;
}

Architecture Architecture::threshold(int feature_dim, int label_count) {
  Architecture a;
  a.input_h = 1;
  a.input_w = feature_dim;
  a.layers = {{feature_dim, 128, true}, {128, label_count, false}};
  a.validate();
  return a;
}

Mlp::Mlp(Architecture arch, NetworkKind kind) : arch_(std::move(arch)), kind_(kind) {
  arch_.validate();
  params_.assign(static_cast<size_t>(arch_.param_count()), 0.0);
}

Mlp Mlp::init(Architecture arch, NetworkKind kind, uint64_t seed) {
  Mlp net(std::move(arch), kind);
  Rng rng = Rng::derive(seed, {static_cast<uint64_t>(kind), 0x696e6974ull});
  size_t offset = 0;
  for (const auto& c : net.arch_.stem) {
    const size_t fan_in = static_cast<size_t>(c.in_c) * c.kernel * c.kernel;
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    size_t w = fan_in * c.out_c;
    for (size_t i = 0; i < w; ++i) net.params_[offset + i] = rng.uniform_real(-bound, bound);
    offset += w + c.out_c;  // biases stay zero
  }
  for (const auto& l : net.arch_.layers) {
    double bound = std::sqrt(6.0 / static_cast<double>(l.in));
    size_t w = static_cast<size_t>(l.in) * l.out;
    for (size_t i = 0; i < w; ++i) net.params_[offset + i] = rng.uniform_real(-bound, bound);
    offset += w + l.out;
  }
  return net;
}

void Mlp::run_layers(const std::vector<double>& inputs, int batch,
                     std::vector<std::vector<double>>* activations) const {
  if (batch <= 0) throw std::invalid_argument("forward: batch must be positive");
  if (inputs.size() != static_cast<size_t>(batch) * arch_.input_dim())
    throw std::invalid_argument("forward: input size does not match architecture");
  auto& acts = *activations;
  const size_t stem_count = arch_.stem.size();
  acts.resize(stem_count + arch_.layers.size() + 1);
  acts[0] = inputs;
  size_t offset = 0;

  std::vector<PlaneDims> dims = stem_dims(arch_);
  std::vector<double> col;
  for (size_t si = 0; si < stem_count; ++si) {
    const auto& cl = arch_.stem[si];
    const PlaneDims in = dims[si];
    const PlaneDims out = dims[si + 1];
    const int patch = cl.in_c * cl.kernel * cl.kernel;
    const int positions = out.h * out.w;
    const double* wts = params_.data() + offset;
    const double* b = wts + static_cast<size_t>(cl.out_c) * patch;
    const std::vector<double>& src = acts[si];
    std::vector<double>& dst = acts[si + 1];
    dst.assign(static_cast<size_t>(batch) * cl.out_c * positions, 0.0);
    col.resize(static_cast<size_t>(positions) * patch);
    for (int n = 0; n < batch; ++n) {
      const double* x = src.data() + static_cast<size_t>(n) * in.c * in.h * in.w;
      im2col(x, in.c, in.h, in.w, cl.kernel, cl.stride, out.h, out.w, col.data());
      double* y = dst.data() + static_cast<size_t>(n) * cl.out_c * positions;
      for (int oc = 0; oc < cl.out_c; ++oc) {
        const double* wr = wts + static_cast<size_t>(oc) * patch;
        double* yr = y + static_cast<size_t>(oc) * positions;
        for (int p = 0; p < positions; ++p) {
          const double* cp = col.data() + static_cast<size_t>(p) * patch;
          double acc = b[oc];
          for (int q = 0; q < patch; ++q) acc += wr[q] * cp[q];
          yr[p] = cl.relu && acc < 0.0 ? 0.0 : acc;
        }
      }
    }
    offset += static_cast<size_t>(cl.out_c) * patch + cl.out_c;
  }

  for (size_t li = 0; li < arch_.layers.size(); ++li) {
    const auto& l = arch_.layers[li];
    const double* w = params_.data() + offset;
    const double* b = params_.data() + offset + static_cast<size_t>(l.in) * l.out;
    const std::vector<double>& src = acts[stem_count + li];
    std::vector<double>& dst = acts[stem_count + li + 1];
    dst.assign(static_cast<size_t>(batch) * l.out, 0.0);
    for (int n = 0; n < batch; ++n) {
      const double* x = src.data() + static_cast<size_t>(n) * l.in;
      double* y = dst.data() + static_cast<size_t>(n) * l.out;
      for (int o = 0; o < l.out; ++o) {
        const double* wr = w + static_cast<size_t>(o) * l.in;
        double acc = b[o];
        for (int i = 0; i < l.in; ++i) acc += wr[i] * x[i];
        y[o] = l.relu && acc < 0.0 ? 0.0 : acc;
      }
    }
    offset += static_cast<size_t>(l.in) * l.out + l.out;
  }
}

void Mlp::forward(const std::vector<double>& inputs, int batch) {
  run_layers(inputs, batch, &activations_);
  cache_batch_ = batch;
  has_cache_ = true;
}

const std::vector<double>& Mlp::outputs() const {
  if (!has_cache_) throw std::logic_error("outputs: no forward cache");
  return activations_.back();
}

const std::vector<double>& Mlp::features() const {
  if (!has_cache_) throw std::logic_error("features: no forward cache");
  return activations_[activations_.size() - 2];
}

std::vector<double> Mlp::backward(const std::vector<double>& doutputs) const {
  if (!has_cache_) throw std::logic_error("backward: no forward cache (call forward first)");
  const int batch = cache_batch_;
  if (doutputs.size() != static_cast<size_t>(batch) * arch_.output_dim())
    throw std::invalid_argument("backward: gradient size does not match outputs");

  const size_t stem_count = arch_.stem.size();
  std::vector<double> grads(params_.size(), 0.0);
  std::vector<double> delta = doutputs;  // d(loss)/d(layer output), batch rows
  std::vector<double> delta_prev;

  // Per-layer parameter offsets: stem first, then dense.
  std::vector<size_t> offsets(stem_count + arch_.layers.size());
  size_t off = 0;
  for (size_t si = 0; si < stem_count; ++si) {
    offsets[si] = off;
    const auto& cl = arch_.stem[si];
    off += static_cast<size_t>(cl.out_c) * cl.in_c * cl.kernel * cl.kernel + cl.out_c;
  }
  for (size_t li = 0; li < arch_.layers.size(); ++li) {
    offsets[stem_count + li] = off;
    off += static_cast<size_t>(arch_.layers[li].in) * arch_.layers[li].out + arch_.layers[li].out;
  }

  for (int li = static_cast<int>(arch_.layers.size()) - 1; li >= 0; --li) {
    const auto& l = arch_.layers[li];
    const std::vector<double>& input_act = activations_[stem_count + li];
    const std::vector<double>& output_act = activations_[stem_count + li + 1];
    const double* w = params_.data() + offsets[stem_count + li];
    double* dw = grads.data() + offsets[stem_count + li];
    double* db = grads.data() + offsets[stem_count + li] + static_cast<size_t>(l.in) * l.out;

    if (l.relu) {
      // Output activations are post-ReLU; gate the incoming gradient.
      for (int n = 0; n < batch; ++n) {
        double* d = delta.data() + static_cast<size_t>(n) * l.out;
        const double* a = output_act.data() + static_cast<size_t>(n) * l.out;
        for (int o = 0; o < l.out; ++o)
          if (a[o] <= 0.0) d[o] = 0.0;
      }
    }

    const bool need_input_grad = li > 0 || stem_count > 0;
    if (need_input_grad) delta_prev.assign(static_cast<size_t>(batch) * l.in, 0.0);
    for (int n = 0; n < batch; ++n) {
      const double* x = input_act.data() + static_cast<size_t>(n) * l.in;
      const double* d = delta.data() + static_cast<size_t>(n) * l.out;
      for (int o = 0; o < l.out; ++o) {
        double g = d[o];
        if (g == 0.0) continue;
        double* dwr = dw + static_cast<size_t>(o) * l.in;
        for (int i = 0; i < l.in; ++i) dwr[i] += g * x[i];
        db[o] += g;
      }
      if (need_input_grad) {
        double* dp = delta_prev.data() + static_cast<size_t>(n) * l.in;
        for (int o = 0; o < l.out; ++o) {
          double g = d[o];
          if (g == 0.0) continue;
          const double* wr = w + static_cast<size_t>(o) * l.in;
          for (int i = 0; i < l.in; ++i) dp[i] += g * wr[i];
        }
      }
    }
    if (need_input_grad) delta.swap(delta_prev);
  }

  std::vector<PlaneDims> dims = stem_dims(arch_);
  std::vector<double> col;
  std::vector<double> dcol;
  for (int si = static_cast<int>(stem_count) - 1; si >= 0; --si) {
    const auto& cl = arch_.stem[si];
    const PlaneDims in = dims[si];
    const PlaneDims out = dims[si + 1];
    const int patch = cl.in_c * cl.kernel * cl.kernel;
    const int positions = out.h * out.w;
    const std::vector<double>& input_act = activations_[si];
    const std::vector<double>& output_act = activations_[si + 1];
    const double* wts = params_.data() + offsets[si];
    double* dw = grads.data() + offsets[si];
    double* db = grads.data() + offsets[si] + static_cast<size_t>(cl.out_c) * patch;

    if (cl.relu) {
      for (size_t i = 0; i < delta.size(); ++i)
        if (output_act[i] <= 0.0) delta[i] = 0.0;
    }

    if (si > 0) delta_prev.assign(static_cast<size_t>(batch) * in.c * in.h * in.w, 0.0);
    col.resize(static_cast<size_t>(positions) * patch);
    for (int n = 0; n < batch; ++n) {
      const double* x = input_act.data() + static_cast<size_t>(n) * in.c * in.h * in.w;
      im2col(x, in.c, in.h, in.w, cl.kernel, cl.stride, out.h, out.w, col.data());
      const double* d = delta.data() + static_cast<size_t>(n) * cl.out_c * positions;
      for (int oc = 0; oc < cl.out_c; ++oc) {
        const double* dr = d + static_cast<size_t>(oc) * positions;
        double* dwr = dw + static_cast<size_t>(oc) * patch;
        for (int p = 0; p < positions; ++p) {
          double g = dr[p];
          if (g == 0.0) continue;
          const double* cp = col.data() + static_cast<size_t>(p) * patch;
          for (int q = 0; q < patch; ++q) dwr[q] += g * cp[q];
          db[oc] += g;
        }
      }
      if (si > 0) {
        dcol.assign(static_cast<size_t>(positions) * patch, 0.0);
        for (int oc = 0; oc < cl.out_c; ++oc) {
          const double* dr = d + static_cast<size_t>(oc) * positions;
          const double* wr = wts + static_cast<size_t>(oc) * patch;
          for (int p = 0; p < positions; ++p) {
            double g = dr[p];
            if (g == 0.0) continue;
            double* dcp = dcol.data() + static_cast<size_t>(p) * patch;
            for (int q = 0; q < patch; ++q) dcp[q] += g * wr[q];
          }
        }
        col2im_add(dcol.data(), in.c, in.h, in.w, cl.kernel, cl.stride, out.h, out.w,
                   delta_prev.data() + static_cast<size_t>(n) * in.c * in.h * in.w);
      }
    }
    if (si > 0) delta.swap(delta_prev);
  }
  return grads;
}

void Mlp::infer(const std::vector<double>& input, std::vector<double>* feature_out,
                std::vector<double>* output_out) const {
  std::vector<std::vector<double>> acts;
  run_layers(input, 1, &acts);
  if (feature_out) *feature_out = acts[acts.size() - 2];
  if (output_out) *output_out = acts.back();
}

void Mlp::infer_batch(const std::vector<double>& inputs, int batch,
                      std::vector<double>* features_out, std::vector<double>* outputs_out) const {
  std::vector<std::vector<double>> acts;
  run_layers(inputs, batch, &acts);
  if (features_out) *features_out = std::move(acts[acts.size() - 2]);
  if (outputs_out) *outputs_out = std::move(acts.back());
}

namespace {

constexpr char kMagic[4] = {'R', 'L', 'C', 'P'};
constexpr uint32_t kFormatVersion = 2;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 4 > in.size()) throw std::runtime_error("checkpoint: truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("checkpoint: truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

void save_checkpoint(const Mlp& net, const std::string& path) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kFormatVersion);
  out.push_back(static_cast<uint8_t>(net.kind()));
  put_u32(out, static_cast<uint32_t>(net.arch().input_h));
  put_u32(out, static_cast<uint32_t>(net.arch().input_w));
  put_u32(out, static_cast<uint32_t>(net.arch().stem.size()));
  for (const auto& c : net.arch().stem) {
    put_u32(out, static_cast<uint32_t>(c.in_c));
    put_u32(out, static_cast<uint32_t>(c.out_c));
    put_u32(out, static_cast<uint32_t>(c.kernel));
    put_u32(out, static_cast<uint32_t>(c.stride));
    out.push_back(c.relu ? 1 : 0);
  }
  put_u32(out, static_cast<uint32_t>(net.arch().layers.size()));
  for (const auto& l : net.arch().layers) {
    put_u32(out, static_cast<uint32_t>(l.in));
    put_u32(out, static_cast<uint32_t>(l.out));
    out.push_back(l.relu ? 1 : 0);
  }
  put_u64(out, net.params().size());
  for (double p : net.params()) put_u64(out, std::bit_cast<uint64_t>(p));
  write_file_bytes(path, out.data(), out.size());
}

Mlp load_checkpoint(const std::string& path) {
  std::vector<uint8_t> in = read_file_bytes(path);
  size_t pos = 0;
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  pos = 4;
  uint32_t version = get_u32(in, pos);
  if (version != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format version in " + path);
  if (pos >= in.size()) throw std::runtime_error("checkpoint: truncated");
  auto kind = static_cast<NetworkKind>(in[pos++]);
  Architecture arch;
  arch.input_h = static_cast<int>(get_u32(in, pos));
  arch.input_w = static_cast<int>(get_u32(in, pos));
  uint32_t stem_count = get_u32(in, pos);
  for (uint32_t i = 0; i < stem_count; ++i) {
    ConvLayer c;
    c.in_c = static_cast<int>(get_u32(in, pos));
    c.out_c = static_cast<int>(get_u32(in, pos));
    c.kernel = static_cast<int>(get_u32(in, pos));
    c.stride = static_cast<int>(get_u32(in, pos));
    if (pos >= in.size()) throw std::runtime_error("checkpoint: truncated");
    c.relu = in[pos++] != 0;
    arch.stem.push_back(c);
  }
  uint32_t layer_count = get_u32(in, pos);
  for (uint32_t i = 0; i < layer_count; ++i) {
    DenseLayer l;
    l.in = static_cast<int>(get_u32(in, pos));
    l.out = static_cast<int>(get_u32(in, pos));
    if (pos >= in.size()) throw std::runtime_error("checkpoint: truncated");
    l.relu = in[pos++] != 0;
    arch.layers.push_back(l);
  }
  Mlp net(std::move(arch), kind);
  uint64_t n = get_u64(in, pos);
  if (n != net.params().size()) throw std::runtime_error("checkpoint: parameter count mismatch");
  for (uint64_t i = 0; i < n; ++i) net.params()[i] = std::bit_cast<double>(get_u64(in, pos));
  if (pos != in.size()) throw std::runtime_error("checkpoint: trailing bytes in " + path);
  return net;
}

}  // namespace ranklab
