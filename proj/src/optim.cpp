#include "ranklab/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace ranklab {

OptimizerState OptimizerState::make(size_t param_count, double lr, double mom, double decay) {
  if (lr <= 0.0 || mom < 0.0 || decay < 0.0)
    throw std::invalid_argument("optimizer: bad hyperparameters");
  OptimizerState s;
  s.velocity.assign(param_count, 0.0);
  s.learning_rate = lr;
  s.momentum = mom;
  s.weight_decay = decay;
  return s;
}

void sgd_step(std::vector<double>& params, const std::vector<double>& grads,
              OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.velocity.size())
    throw std::invalid_argument("sgd_step: shape mismatch");
  // Validate before touching anything so a failed step leaves state intact.
  for (double g : grads)
    if (!std::isfinite(g))
      throw std::runtime_error("sgd_step: non-finite gradient, training aborted");
  for (size_t i = 0; i < params.size(); ++i) {
    double v = state.momentum * state.velocity[i] + (grads[i] + state.weight_decay * params[i]);
    state.velocity[i] = v;
    params[i] -= state.learning_rate * v;
  }
}

}  // namespace ranklab
