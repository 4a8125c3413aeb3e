#pragma once

#include <cstddef>
#include <vector>

namespace ranklab {

/// SGD with momentum and coupled L2 weight decay:
///   v <- momentum * v + (grad + weight_decay * param)
///   param <- param - learning_rate * v
struct OptimizerState {
  std::vector<double> velocity;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-5;

  static OptimizerState make(size_t param_count, double lr, double mom, double decay);
};

/// One update step; throws std::runtime_error on a non-finite gradient so a
/// diverged run aborts with a diagnostic instead of poisoning the weights.
void sgd_step(std::vector<double>& params, const std::vector<double>& grads, OptimizerState& state);

}  // namespace ranklab
