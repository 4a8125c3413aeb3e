// Writes a synthetic digit pool in the IDX container layout, standing in for
// the MNIST files in environments that do not ship them.
#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "ranklab/synth_digits.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mkdigits: emit synthetic 28x28 digit IDX files"};
  std::string out;
  int train_per_class = 600;
  int test_per_class = 100;
  uint64_t seed = 0;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--train-per-class", train_per_class, "training images per class")
      ->check(CLI::PositiveNumber);
  app.add_option("--test-per-class", test_per_class, "test images per class")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "generation seed");

  try {
    app.parse(argc, argv);
    ranklab::write_synthetic_idx(out, "train", train_per_class, seed);
    ranklab::write_synthetic_idx(out, "t10k", test_per_class, seed + 1);
    std::cout << "wrote " << out << "/train-*  (" << train_per_class * 10 << " images)\n"
              << "wrote " << out << "/t10k-*   (" << test_per_class * 10 << " images)\n";
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
