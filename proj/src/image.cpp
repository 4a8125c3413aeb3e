#include "ranklab/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ranklab/util.hpp"

namespace ranklab {

Image8 resize_bilinear_to(const Image8& src, int out_h, int out_w) {
  if (src.height <= 0 || src.width <= 0) throw std::invalid_argument("resize: empty source image");
  if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize: non-positive output size");
  Image8 dst(out_h, out_w);
  const double ry = static_cast<double>(src.height) / out_h;
  const double rx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double sy = (y + 0.5) * ry - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
    int y0 = static_cast<int>(sy);
    int y1 = std::min(y0 + 1, src.height - 1);
    double fy = sy - y0;
    for (int x = 0; x < out_w; ++x) {
      double sx = (x + 0.5) * rx - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
      int x0 = static_cast<int>(sx);
      int x1 = std::min(x0 + 1, src.width - 1);
      double fx = sx - x0;
      double top = src.at(y0, x0) * (1.0 - fx) + src.at(y0, x1) * fx;
      double bot = src.at(y1, x0) * (1.0 - fx) + src.at(y1, x1) * fx;
      double v = top * (1.0 - fy) + bot * fy;
      dst.at(y, x) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return dst;
}

Image8 resize_bilinear(const Image8& src, double scale) {
  if (!(scale >= 1.0)) throw std::invalid_argument("resize_bilinear: scale must be >= 1");
  int out_h = static_cast<int>(std::lround(src.height * scale));
  int out_w = static_cast<int>(std::lround(src.width * scale));
  return resize_bilinear_to(src, out_h, out_w);
}

std::vector<double> ingest_image(const Image8& img, int out_h, int out_w) {
  const Image8* use = &img;
  Image8 resized;
  if (img.height != out_h || img.width != out_w) {
    resized = resize_bilinear_to(img, out_h, out_w);
    use = &resized;
  }
  std::vector<double> values(use->size());
  for (size_t i = 0; i < values.size(); ++i) values[i] = use->pixels[i] / 255.0;
  return values;
}

void write_pgm(const Image8& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write PGM: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("PGM write failed: " + path);
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

Image8 read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM: " + path);
  if (next_pgm_token(in) != "P5") throw std::runtime_error("not a binary PGM: " + path);
  int w = std::stoi(next_pgm_token(in));
  int h = std::stoi(next_pgm_token(in));
  int maxval = std::stoi(next_pgm_token(in));
  if (w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error("unsupported PGM header: " + path);
  Image8 img(h, w);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size()))
    throw std::runtime_error("truncated PGM payload: " + path);
  return img;
}

}  // namespace ranklab
