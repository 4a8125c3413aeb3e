#include <doctest.h>

#include <set>
#include <stdexcept>

#include "ranklab/datagen.hpp"
#include "ranklab/synth_digits.hpp"
#include "ranklab/util.hpp"
#include "support/oracles.hpp"

using namespace ranklab;

TEST_SUITE("synth_digits") {

TEST_CASE("rendered digits are 28x28, non-empty, in range") {
  Rng rng(1);
  for (int d = 0; d < 10; ++d) {
    Image8 img = render_synthetic_digit(d, rng);
    CHECK(img.height == 28);
    CHECK(img.width == 28);
    int lit = 0;
    for (uint8_t p : img.pixels) {
      if (p > 0) {
        ++lit;
        CHECK(p >= 120);
      }
    }
    // even the thinnest digit (1) has two strokes of a few dozen pixels
    CHECK(lit > 30);
    CHECK(lit < 28 * 28 / 2);
  }
  Rng other(2);
  CHECK_THROWS_AS(render_synthetic_digit(10, other), std::invalid_argument);
  CHECK_THROWS_AS(render_synthetic_digit(-1, other), std::invalid_argument);
}

TEST_CASE("rendering is deterministic in the rng state") {
  Rng a(5), b(5);
  for (int d = 0; d < 10; ++d) CHECK(render_synthetic_digit(d, a) == render_synthetic_digit(d, b));
}

TEST_CASE("digit classes are visually distinct") {
  // with jitter frozen by a shared rng state, different digits must differ
  std::set<std::vector<uint8_t>> seen;
  for (int d = 0; d < 10; ++d) {
    Rng rng(99);  // identical box/stroke/jitter draws for every class
    seen.insert(render_synthetic_digit(d, rng).pixels);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("pool images depend only on (seed, class, index)") {
  DigitPool small = make_synthetic_pool(2, 7, "a");
  DigitPool big = make_synthetic_pool(5, 7, "b");
  for (int d = 0; d < 10; ++d) {
    REQUIRE(small.classes[d].size() == 2);
    REQUIRE(big.classes[d].size() == 5);
    for (int i = 0; i < 2; ++i) CHECK(small.classes[d][i] == big.classes[d][i]);
  }
  CHECK(small.complete());
  CHECK(small.source == "a");

  DigitPool reseeded = make_synthetic_pool(2, 8, "c");
  CHECK(reseeded.classes[0][0] != small.classes[0][0]);

  CHECK_THROWS_AS(make_synthetic_pool(0, 1, "x"), std::invalid_argument);
}

TEST_CASE("images within a class vary") {
  DigitPool pool = make_synthetic_pool(6, 3, "t");
  for (int d = 0; d < 10; ++d) {
    std::set<std::vector<uint8_t>> unique;
    for (const Image8& img : pool.classes[d]) unique.insert(img.pixels);
    CHECK(unique.size() == 6);
  }
}

TEST_CASE("idx output is class-balanced and loadable") {
  oracles::TmpDir tmp;
  write_synthetic_idx(tmp.path.string(), "t10k", 4, 123);
  IdxTensor images = parse_idx(read_file_bytes((tmp.path / "t10k-images-idx3-ubyte").string()));
  IdxTensor labels = parse_idx(read_file_bytes((tmp.path / "t10k-labels-idx1-ubyte").string()));
  CHECK(images.dims == std::vector<int>{40, 28, 28});
  CHECK(labels.dims == std::vector<int>{40});

  int histogram[10] = {};
  for (uint8_t l : labels.payload) {
    REQUIRE(l <= 9);
    ++histogram[l];
  }
  for (int d = 0; d < 10; ++d) CHECK(histogram[d] == 4);
  // any prefix is class-balanced: the first ten labels are 0..9
  for (int d = 0; d < 10; ++d) CHECK(labels.payload[d] == d);

  DigitPool pool = pool_from_tensors(images, labels, "back");
  CHECK(pool.complete());
}

}  // TEST_SUITE
