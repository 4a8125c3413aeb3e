#include "ranklab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ranklab/image.hpp"
#include "ranklab/util.hpp"

namespace fs = std::filesystem;

namespace ranklab {

namespace {

uint32_t read_be32(const std::vector<uint8_t>& bytes, size_t offset) {
  return (uint32_t(bytes[offset]) << 24) | (uint32_t(bytes[offset + 1]) << 16) |
         (uint32_t(bytes[offset + 2]) << 8) | uint32_t(bytes[offset + 3]);
}

[[noreturn]] void idx_error(size_t offset, const std::string& what) {
  throw std::runtime_error("idx: " + what + " at offset " + std::to_string(offset));
}

}  // namespace

IdxTensor parse_idx(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4) idx_error(bytes.size(), "truncated magic");
  uint32_t magic = read_be32(bytes, 0);
  if ((magic >> 8) != 0x08) idx_error(0, "bad magic 0x" + hex64(magic).substr(8));
  int ndims = static_cast<int>(magic & 0xff);
  if (ndims < 1 || ndims > 8)
    idx_error(3, "unsupported dimension count " + std::to_string(ndims));
  size_t header = 4 + 4 * static_cast<size_t>(ndims);
  if (bytes.size() < header) idx_error(bytes.size(), "truncated dimension list");

  IdxTensor out;
  uint64_t total = 1;
  for (int d = 0; d < ndims; ++d) {
    uint32_t size = read_be32(bytes, 4 + 4 * static_cast<size_t>(d));
    if (size == 0 || size > (1u << 28)) idx_error(4 + 4 * static_cast<size_t>(d), "bad dimension size");
    out.dims.push_back(static_cast<int>(size));
    total *= size;
    if (total > (1ull << 32)) idx_error(4 + 4 * static_cast<size_t>(d), "tensor too large");
  }
  if (bytes.size() < header + total)
    idx_error(bytes.size(), "truncated payload, expected " + std::to_string(total) + " bytes from");
  if (bytes.size() > header + total) idx_error(header + total, "trailing bytes");
  out.payload.assign(bytes.begin() + header, bytes.end());
  return out;
}

std::vector<uint8_t> encode_idx(const std::vector<int>& dims, const std::vector<uint8_t>& payload) {
  if (dims.empty() || dims.size() > 8) throw std::invalid_argument("encode_idx: 1..8 dimensions");
  uint64_t total = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("encode_idx: dimensions must be positive");
    total *= static_cast<uint64_t>(d);
  }
  if (total != payload.size()) throw std::invalid_argument("encode_idx: payload size mismatch");
  std::vector<uint8_t> out;
  out.reserve(4 + 4 * dims.size() + payload.size());
  uint32_t magic = 0x0800u | static_cast<uint32_t>(dims.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(uint8_t(magic >> shift));
  for (int d : dims)
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(uint8_t(uint32_t(d) >> shift));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

bool DigitPool::complete() const {
  return std::all_of(classes.begin(), classes.end(),
                     [](const std::vector<Image8>& c) { return !c.empty(); });
}

DigitPool pool_from_tensors(const IdxTensor& images, const IdxTensor& labels, std::string tag) {
  if (images.dims.size() != 3 || images.dims[1] != 28 || images.dims[2] != 28)
    throw std::invalid_argument("digit pool: image tensor must be N x 28 x 28");
  if (labels.dims.size() != 1)
    throw std::invalid_argument("digit pool: label tensor must be one-dimensional");
  if (images.dims[0] != labels.dims[0])
    throw std::invalid_argument("digit pool: image/label counts differ");

  DigitPool pool;
  pool.source = std::move(tag);
  const size_t stride = 28 * 28;
  for (int n = 0; n < images.dims[0]; ++n) {
    uint8_t label = labels.payload[n];
    if (label > 9)
      throw std::invalid_argument("digit pool: label " + std::to_string(label) + " out of range");
    Image8 img;
    img.height = img.width = 28;
    img.pixels.assign(images.payload.begin() + n * stride,
                      images.payload.begin() + (n + 1) * stride);
    pool.classes[label].push_back(std::move(img));
  }
  if (!pool.complete()) throw std::invalid_argument("digit pool: some classes have no images");
  return pool;
}

DigitPool load_digit_pool(const std::string& images_path, const std::string& labels_path,
                          std::string tag) {
  return pool_from_tensors(parse_idx(read_file_bytes(images_path)),
                           parse_idx(read_file_bytes(labels_path)), std::move(tag));
}

GenConfig GenConfig::paper() { return GenConfig{}; }

GenConfig GenConfig::desk() {
  GenConfig cfg;
  cfg.canvas_size = 112;
  cfg.digits_min = 3;
  cfg.digits_max = 4;
  cfg.scale_low = 1.0;
  cfg.scale_high = 3.0;
  cfg.train_count = 5000;
  cfg.val_count = 500;
  cfg.test_count = 500;
  return cfg;
}

void GenConfig::validate() const {
  if (digits_min < 1 || digits_min > digits_max || digits_max > 10)
    throw std::invalid_argument("gen config: need 1 <= digits_min <= digits_max <= 10");
  if (scale_low < 1.0 || scale_high < scale_low)
    throw std::invalid_argument("gen config: need 1 <= scale_low <= scale_high");
  if (std::lround(28.0 * scale_high) > canvas_size)
    throw std::invalid_argument("gen config: largest digit would not fit the canvas");
  if (train_count < 0 || val_count < 0 || test_count < 0)
    throw std::invalid_argument("gen config: negative split count");
}

std::string GenConfig::canonical_string() const {
  std::ostringstream out;
  out << "ranked-mnist canvas=" << canvas_size << " digits=" << digits_min << ".." << digits_max
      << " scales=" << format_full(scale_low) << ".." << format_full(scale_high)
      << " counts=" << train_count << '/' << val_count << '/' << test_count << " seed=" << seed;
  return out.str();
}

std::string GenConfig::digest() const { return hex64(fnv1a64(canonical_string())); }

namespace {

struct Box {
  int x = 0, y = 0, side = 0;
};

bool boxes_overlap(const Box& a, const Box& b) {
  return a.x < b.x + b.side && b.x < a.x + a.side && a.y < b.y + b.side && b.y < a.y + a.side;
}

long overlap_area(const Box& a, const Box& b) {
  long w = std::min(a.x + a.side, b.x + b.side) - std::max(a.x, b.x);
  long h = std::min(a.y + a.side, b.y + b.side) - std::max(a.y, b.y);
  return (w > 0 && h > 0) ? w * h : 0;
}

int scaled_side(double s) { return static_cast<int>(std::lround(28.0 * s)); }

/// Draws k distinct classes via a partial Fisher-Yates over 0..9.
std::vector<int> draw_classes(int k, Rng& rng) {
  std::array<int, 10> all;
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < k; ++i) {
    int j = rng.uniform_int(i, 9);
    std::swap(all[i], all[j]);
  }
  return std::vector<int>(all.begin(), all.begin() + k);
}

struct Pick {
  int cls = 0;
  int image_index = 0;
  double scale = 0.0;
  Box box;
};

void composite(Image8& canvas, const Image8& digit, int x, int y) {
  for (int py = 0; py < digit.height; ++py) {
    uint8_t* row = canvas.pixels.data() + static_cast<size_t>(y + py) * canvas.width + x;
    const uint8_t* src = digit.pixels.data() + static_cast<size_t>(py) * digit.width;
    for (int px = 0; px < digit.width; ++px) row[px] = std::max(row[px], src[px]);
  }
}

Instance finish_instance(const DigitPool& pool, int canvas_size, int64_t id,
                         const std::vector<Pick>& picks) {
  Image8 canvas;
  canvas.height = canvas.width = canvas_size;
  canvas.pixels.assign(static_cast<size_t>(canvas_size) * canvas_size, 0);
  Importances importances(10);
  for (const Pick& p : picks) {
    Image8 scaled = resize_bilinear(pool.classes[p.cls][p.image_index], p.scale);
    composite(canvas, scaled, p.box.x, p.box.y);
    importances[p.cls] = p.scale;
  }
  RankVector ranks = assign_ranks(importances);
  return Instance(id, std::move(canvas), std::move(ranks), std::move(importances));
}

constexpr int kPlaceAttempts = 100;
constexpr int kInstanceRestarts = 10000;

}  // namespace

Instance compose_instance(const DigitPool& pool, const GenConfig& cfg, int64_t id, Rng& rng,
                          std::vector<DigitPlacement>* layout) {
  cfg.validate();
  if (!pool.complete()) throw std::invalid_argument("compose_instance: incomplete digit pool");

  for (int restart = 0; restart < kInstanceRestarts; ++restart) {
    int n = rng.uniform_int(cfg.digits_min, cfg.digits_max);
    std::vector<int> classes = draw_classes(n, rng);
    std::vector<Pick> picks(n);
    for (int i = 0; i < n; ++i) {
      picks[i].cls = classes[i];
      picks[i].image_index =
          static_cast<int>(rng.uniform_below(pool.classes[classes[i]].size()));
      picks[i].scale = rng.uniform_real(cfg.scale_low, cfg.scale_high);
      picks[i].box.side = scaled_side(picks[i].scale);
    }
    // Place big digits first: a large box dropped onto a part-filled canvas
    // fails far more often than the reverse, which would skew the accepted
    // scale distribution toward small digits.
    std::stable_sort(picks.begin(), picks.end(),
                     [](const Pick& a, const Pick& b) { return a.box.side > b.box.side; });

    bool placed_all = true;
    for (int i = 0; i < n && placed_all; ++i) {
      Box& box = picks[i].box;
      bool placed = false;
      for (int attempt = 0; attempt < kPlaceAttempts; ++attempt) {
        box.x = rng.uniform_int(0, cfg.canvas_size - box.side);
        box.y = rng.uniform_int(0, cfg.canvas_size - box.side);
        bool clash = false;
        for (int j = 0; j < i; ++j)
          if (boxes_overlap(box, picks[j].box)) {
            clash = true;
            break;
          }
        if (!clash) {
          placed = true;
          break;
        }
      }
      placed_all = placed;
    }
    if (placed_all) {
      if (layout) {
        layout->clear();
        for (const Pick& p : picks)
          layout->push_back({p.cls, p.scale, p.box.x, p.box.y, p.box.side});
      }
      return finish_instance(pool, cfg.canvas_size, id, picks);
    }
  }
  throw std::runtime_error("generation failed: digits cannot be placed under config [" +
                           cfg.canonical_string() + "]");
}

namespace {

// rng derivation salts ("gen", "cal" in ASCII)
constexpr uint64_t kGenSalt = 0x67656e;
constexpr uint64_t kCalSalt = 0x63616c;

}  // namespace

RankedDataset generate_ranked_mnist(const GenConfig& cfg, const DigitPool& train_pool,
                                    const DigitPool& eval_pool) {
  cfg.validate();
  RankedDataset data{LabelSpace(10), {}, {}, {}, Provenance{cfg.seed, cfg.digest()}};
  const int counts[3] = {cfg.train_count, cfg.val_count, cfg.test_count};
  int64_t next_id = 0;
  for (int s = 0; s < 3; ++s) {
    const DigitPool& pool = (s == 0) ? train_pool : eval_pool;
    std::vector<Instance>& out =
        (s == 0) ? data.train : (s == 1) ? data.val : data.test;
    out.reserve(counts[s]);
    for (int i = 0; i < counts[s]; ++i) {
      Rng rng = Rng::derive(cfg.seed, {kGenSalt, static_cast<uint64_t>(s), static_cast<uint64_t>(i)});
      out.push_back(compose_instance(pool, cfg, next_id++, rng));
    }
  }
  return data;
}

CalibConfig CalibConfig::paper() { return CalibConfig{}; }

CalibConfig CalibConfig::desk() {
  CalibConfig cfg;
  cfg.canvas_size = 112;
  cfg.scales = {1.0, 2.0, 3.0};
  cfg.count = 1000;
  return cfg;
}

void CalibConfig::validate() const {
  if (scales.empty() || scales.size() > 10)
    throw std::invalid_argument("calibration config: need 1..10 scales");
  for (double s : scales) {
    if (s < 1.0) throw std::invalid_argument("calibration config: scales must be >= 1");
    if (std::lround(28.0 * s) > canvas_size)
      throw std::invalid_argument("calibration config: a digit would not fit the canvas");
  }
  std::vector<double> sorted = scales;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("calibration config: scales must be distinct");
  if (count < 1) throw std::invalid_argument("calibration config: count must be >= 1");
}

std::string CalibConfig::canonical_string() const {
  std::ostringstream out;
  out << "calibration canvas=" << canvas_size << " scales=";
  for (size_t i = 0; i < scales.size(); ++i) out << (i ? "," : "") << format_full(scales[i]);
  out << " count=" << count << " seed=" << seed;
  return out.str();
}

std::string CalibConfig::digest() const { return hex64(fnv1a64(canonical_string())); }

RankedDataset generate_calibration_set(const DigitPool& pool, const CalibConfig& cfg) {
  cfg.validate();
  if (!pool.complete()) throw std::invalid_argument("calibration: incomplete digit pool");
  const int m = static_cast<int>(cfg.scales.size());

  RankedDataset data{LabelSpace(10), {}, {}, {}, Provenance{cfg.seed, cfg.digest()}};
  data.test.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng = Rng::derive(cfg.seed, {kCalSalt, static_cast<uint64_t>(i)});
    std::vector<int> classes = draw_classes(m, rng);
    std::vector<Pick> picks(m);
    for (int d = 0; d < m; ++d) {
      picks[d].cls = classes[d];
      picks[d].image_index = static_cast<int>(rng.uniform_below(pool.classes[classes[d]].size()));
      picks[d].scale = cfg.scales[d];
      picks[d].box.side = scaled_side(cfg.scales[d]);
    }
    // Largest first; fall back to the least-overlapping candidate when the
    // fixed geometry admits no clean spot.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return picks[a].box.side > picks[b].box.side; });
    std::vector<Box> placed;
    for (int idx : order) {
      Box& box = picks[idx].box;
      Box best = box;
      long best_overlap = -1;
      for (int attempt = 0; attempt < kPlaceAttempts; ++attempt) {
        box.x = rng.uniform_int(0, cfg.canvas_size - box.side);
        box.y = rng.uniform_int(0, cfg.canvas_size - box.side);
        long total = 0;
        for (const Box& other : placed) total += overlap_area(box, other);
        if (best_overlap < 0 || total < best_overlap) {
          best_overlap = total;
          best = box;
        }
        if (total == 0) break;
      }
      box = best;
      placed.push_back(box);
    }
    data.test.push_back(finish_instance(pool, cfg.canvas_size, i, picks));
  }
  return data;
}

namespace {

std::string image_relpath(Split s, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s/%06d.pgm", split_name(s), index);
  return buf;
}

void append_records(std::ostringstream& out, const RankedDataset& data, Split s) {
  const std::vector<Instance>& instances = data.split(s);
  for (size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    out << inst.id << '\t' << split_name(s) << '\t' << image_relpath(s, static_cast<int>(i))
        << '\t' << data.space.size;
    for (int j = 0; j < data.space.size; ++j) out << '\t' << inst.ranks.rank(j);
    for (int j = 0; j < data.space.size; ++j) {
      out << '\t';
      if (j < static_cast<int>(inst.importances.size()) && inst.importances[j])
        out << format_full(*inst.importances[j]);
      else
        out << "-1";
    }
    out << '\t' << data.provenance.seed << '\n';
  }
}

constexpr Split kAllSplits[3] = {Split::train, Split::val, Split::test};

}  // namespace

std::string manifest_text(const RankedDataset& data) {
  std::ostringstream out;
  for (Split s : kAllSplits) append_records(out, data, s);
  return out.str();
}

void save_dataset(const RankedDataset& data, const std::string& dir) {
  fs::create_directories(dir);
  for (Split s : kAllSplits) {
    const std::vector<Instance>& instances = data.split(s);
    if (instances.empty()) continue;
    fs::create_directories(fs::path(dir) / split_name(s));
    for (size_t i = 0; i < instances.size(); ++i)
      write_pgm(instances[i].image,
                (fs::path(dir) / image_relpath(s, static_cast<int>(i))).string());
  }
  write_file_text((fs::path(dir) / "manifest.tsv").string(), manifest_text(data));
  std::ostringstream meta;
  meta << "seed\t" << data.provenance.seed << '\n'
       << "config_digest\t" << data.provenance.config_digest << '\n';
  write_file_text((fs::path(dir) / "meta.txt").string(), meta.str());
}

RankedDataset load_dataset(const std::string& dir) {
  std::string manifest = read_file_text((fs::path(dir) / "manifest.tsv").string());

  int label_count = -1;
  RankedDataset data{LabelSpace(2), {}, {}, {}, {}};
  bool have_seed = false;

  size_t pos = 0;
  int line_no = 0;
  while (pos < manifest.size()) {
    size_t end = manifest.find('\n', pos);
    if (end == std::string::npos) end = manifest.size();
    std::string_view line(manifest.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    auto fail = [&](const std::string& what) -> std::runtime_error {
      return std::runtime_error("manifest line " + std::to_string(line_no) + ": " + what);
    };

    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() < 4) throw fail("too few fields");
    int k = 0;
    try {
      k = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw fail("bad label count '" + fields[3] + "'");
    }
    if (k < 2) throw fail("bad label count " + std::to_string(k));
    if (fields.size() != static_cast<size_t>(2 * k + 5))
      throw fail("expected " + std::to_string(2 * k + 5) + " fields, got " +
                 std::to_string(fields.size()));
    if (label_count == -1) {
      label_count = k;
      data.space = LabelSpace(k);
    } else if (k != label_count) {
      throw fail("label count differs from previous records");
    }

    int64_t id = 0;
    uint64_t seed = 0;
    std::vector<int> ranks(k);
    Importances importances(k);
    try {
      id = std::stoll(fields[0]);
      for (int j = 0; j < k; ++j) ranks[j] = std::stoi(fields[4 + j]);
      for (int j = 0; j < k; ++j) {
        double v = std::stod(fields[4 + k + j]);
        if (v != -1.0) importances[j] = v;
      }
      seed = std::stoull(fields[4 + 2 * k]);
    } catch (const std::exception&) {
      throw fail("unparsable numeric field");
    }

    Split s;
    try {
      s = split_from_name(fields[1]);
    } catch (const std::exception&) {
      throw fail("unknown split '" + fields[1] + "'");
    }

    Image8 image;
    try {
      image = read_pgm((fs::path(dir) / fields[2]).string());
    } catch (const std::exception& e) {
      throw fail(std::string("image: ") + e.what());
    }

    try {
      Instance inst(id, std::move(image), RankVector(std::move(ranks)), std::move(importances));
      validate_instance(inst);
      auto& bucket = (s == Split::train) ? data.train : (s == Split::val) ? data.val : data.test;
      bucket.push_back(std::move(inst));
    } catch (const std::invalid_argument& e) {
      throw fail(std::string("invalid instance: ") + e.what());
    }
    if (!have_seed) {
      data.provenance.seed = seed;
      have_seed = true;
    }
  }
  if (label_count == -1) throw std::runtime_error("manifest is empty: " + dir);

  fs::path meta_path = fs::path(dir) / "meta.txt";
  if (fs::exists(meta_path)) {
    for (const std::string& line : split(read_file_text(meta_path.string()), '\n')) {
      std::vector<std::string> kv = split(line, '\t');
      if (kv.size() == 2 && kv[0] == "config_digest") data.provenance.config_digest = kv[1];
    }
  }
  return data;
}

}  // namespace ranklab
