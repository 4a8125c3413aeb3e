#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ranklab {

/// FNV-1a 64-bit hash, used for config digests.
uint64_t fnv1a64(std::string_view data);

/// Lower-case 16-digit hex rendering of a 64-bit value.
std::string hex64(uint64_t value);

/// Shortest round-trip decimal rendering of a double ("%.17g").
std::string format_full(double value);

/// Compensated (Kahan) accumulator so aggregation order does not matter
/// beyond the last ulp.
class KahanSum {
 public:
  void add(double x) {
    double y = x - compensation_;
    double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const uint8_t* data, size_t size);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

std::vector<std::string> split(std::string_view line, char sep);

}  // namespace ranklab
