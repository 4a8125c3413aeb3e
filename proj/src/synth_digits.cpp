#include "ranklab/synth_digits.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "ranklab/util.hpp"

namespace ranklab {

namespace {

// Segment layout:  A top, G middle, D bottom; F/B upper left/right,
// E/C lower left/right.
enum Segment { A, B, C, D, E, F, G };

constexpr uint8_t kSegmentsByDigit[10] = {
    /*0*/ (1 << A) | (1 << B) | (1 << C) | (1 << D) | (1 << E) | (1 << F),
    /*1*/ (1 << B) | (1 << C),
    /*2*/ (1 << A) | (1 << B) | (1 << G) | (1 << E) | (1 << D),
    /*3*/ (1 << A) | (1 << B) | (1 << G) | (1 << C) | (1 << D),
    /*4*/ (1 << F) | (1 << G) | (1 << B) | (1 << C),
    /*5*/ (1 << A) | (1 << F) | (1 << G) | (1 << C) | (1 << D),
    /*6*/ (1 << A) | (1 << F) | (1 << G) | (1 << E) | (1 << D) | (1 << C),
    /*7*/ (1 << A) | (1 << B) | (1 << C),
    /*8*/ (1 << A) | (1 << B) | (1 << C) | (1 << D) | (1 << E) | (1 << F) | (1 << G),
    /*9*/ (1 << A) | (1 << B) | (1 << C) | (1 << D) | (1 << F) | (1 << G),
};

void fill_rect(Image8& img, int x, int y, int w, int h, uint8_t value) {
  x = std::max(x, 0);
  y = std::max(y, 0);
  int x1 = std::min(x + w, img.width);
  int y1 = std::min(y + h, img.height);
  for (int py = y; py < y1; ++py)
    for (int px = x; px < x1; ++px) {
      uint8_t& p = img.pixels[static_cast<size_t>(py) * img.width + px];
      p = std::max(p, value);
    }
}

}  // namespace

Image8 render_synthetic_digit(int digit, Rng& rng) {
  if (digit < 0 || digit > 9) throw std::invalid_argument("digit must be 0..9");
  Image8 img;
  img.height = img.width = 28;
  img.pixels.assign(28 * 28, 0);

  const int w = rng.uniform_int(12, 18);
  const int h = rng.uniform_int(18, 24);
  const int x0 = rng.uniform_int(2, 28 - 2 - w);
  const int y0 = rng.uniform_int(2, 28 - 2 - h);
  const int t = rng.uniform_int(2, 4);
  const int base = rng.uniform_int(170, 235);
  const int half = h / 2;

  uint8_t mask = kSegmentsByDigit[digit];
  for (int seg = A; seg <= G; ++seg) {
    // Jitter survives whether or not the segment is lit so every digit class
    // consumes the same number of draws.
    int wiggle = rng.uniform_int(-20, 20);
    int shift = rng.uniform_int(-1, 1);
    if (!(mask & (1 << seg))) continue;
    uint8_t v = static_cast<uint8_t>(std::clamp(base + wiggle, 120, 255));
    switch (seg) {
      case A: fill_rect(img, x0 + shift, y0, w, t, v); break;
      case G: fill_rect(img, x0 + shift, y0 + half - t / 2, w, t, v); break;
      case D: fill_rect(img, x0 + shift, y0 + h - t, w, t, v); break;
      case F: fill_rect(img, x0, y0 + shift, t, half, v); break;
      case B: fill_rect(img, x0 + w - t, y0 + shift, t, half, v); break;
      case E: fill_rect(img, x0, y0 + half + shift, t, h - half, v); break;
      case C: fill_rect(img, x0 + w - t, y0 + half + shift, t, h - half, v); break;
    }
  }
  return img;
}

DigitPool make_synthetic_pool(int count_per_class, uint64_t seed, std::string tag) {
  if (count_per_class < 1) throw std::invalid_argument("count_per_class must be >= 1");
  DigitPool pool;
  pool.source = std::move(tag);
  for (int digit = 0; digit < 10; ++digit) {
    pool.classes[digit].reserve(count_per_class);
    for (int i = 0; i < count_per_class; ++i) {
      Rng rng = Rng::derive(seed, {0x737967ull /* "syg" */, static_cast<uint64_t>(digit),
                                   static_cast<uint64_t>(i)});
      pool.classes[digit].push_back(render_synthetic_digit(digit, rng));
    }
  }
  return pool;
}

void write_synthetic_idx(const std::string& dir, const std::string& prefix, int count_per_class,
                         uint64_t seed) {
  DigitPool pool = make_synthetic_pool(count_per_class, seed, prefix);
  std::filesystem::create_directories(dir);

  const int total = count_per_class * 10;
  std::vector<uint8_t> images;
  images.reserve(static_cast<size_t>(total) * 28 * 28);
  std::vector<uint8_t> labels;
  labels.reserve(total);
  // Interleave classes so any prefix of the file is class-balanced.
  for (int i = 0; i < count_per_class; ++i)
    for (int digit = 0; digit < 10; ++digit) {
      const Image8& img = pool.classes[digit][i];
      images.insert(images.end(), img.pixels.begin(), img.pixels.end());
      labels.push_back(static_cast<uint8_t>(digit));
    }

  std::vector<uint8_t> image_bytes = encode_idx({total, 28, 28}, images);
  std::vector<uint8_t> label_bytes = encode_idx({total}, labels);
  auto path = [&](const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
  };
  write_file_bytes(path(prefix + "-images-idx3-ubyte"), image_bytes.data(), image_bytes.size());
  write_file_bytes(path(prefix + "-labels-idx1-ubyte"), label_bytes.data(), label_bytes.size());
}

}  // namespace ranklab
