#pragma once

#include <cstdint>
#include <string>

#include "ranklab/datagen.hpp"

namespace ranklab {

/// Procedural stand-in for the MNIST digit pool: seven-segment style glyphs
/// on a 28x28 canvas with jittered box, stroke width, and intensity, so the
/// generator and trainer can run in environments without the original files.
Image8 render_synthetic_digit(int digit, Rng& rng);

/// `count` images per class, deterministic per seed.
DigitPool make_synthetic_pool(int count_per_class, uint64_t seed, std::string tag);

/// Writes <prefix>-images-idx3-ubyte / <prefix>-labels-idx1-ubyte under dir.
void write_synthetic_idx(const std::string& dir, const std::string& prefix, int count_per_class,
                         uint64_t seed);

}  // namespace ranklab
