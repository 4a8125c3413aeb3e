#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>

namespace ranklab {

/// splitmix64 finalizer; used to mix seeds for named stream derivation.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seeded random stream. All sampling helpers are implemented on top of
/// mt19937_64 output words, so a given seed produces the same draws on
/// every platform (the std distributions make no such promise).
///
/// Streams are derived by name: derive(master, {a, b}) always yields the
/// same stream, independent of any other stream, which is what makes
/// per-instance generation order-independent.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng derive(uint64_t master, std::initializer_list<uint64_t> path) {
    uint64_t h = splitmix64(master ^ 0x52414e4b4c414221ull);
    for (uint64_t word : path) h = splitmix64(h ^ splitmix64(word));
    return Rng(h);
  }

  uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, bound); bound > 0.
  uint64_t uniform_below(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  /// Inclusive integer range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_below(static_cast<uint64_t>(hi - lo) + 1));
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ranklab
