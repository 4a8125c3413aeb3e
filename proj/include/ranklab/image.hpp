#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ranklab {

/// 8-bit grayscale image, row-major.
struct Image8 {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;

  Image8() = default;
  Image8(int h, int w, uint8_t fill = 0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

  uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return pixels.size(); }

  bool operator==(const Image8&) const = default;
};

/// Bilinear resample to an explicit output size. Source coordinates use the
/// half-pixel mapping src = (dst + 0.5) * (in / out) - 0.5 with edge clamping;
/// values are rounded to the nearest 8-bit level.
Image8 resize_bilinear_to(const Image8& src, int out_h, int out_w);

/// Digit-scaling resize: output is round(h*s) x round(w*s). Scales below 1
/// are rejected; the generator only ever enlarges.
Image8 resize_bilinear(const Image8& src, double scale);

/// Flatten to doubles in [0, 1] at the given model input size.
std::vector<double> ingest_image(const Image8& img, int out_h, int out_w);

/// Binary PGM ("P5", maxval 255).
void write_pgm(const Image8& img, const std::string& path);
Image8 read_pgm(const std::string& path);

}  // namespace ranklab
