#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ranklab/optim.hpp"

using namespace ranklab;

TEST_SUITE("optim") {

TEST_CASE("zero gradient and zero decay leave parameters unchanged") {
  OptimizerState st = OptimizerState::make(3, 0.1, 0.9, 0.0);
  std::vector<double> params = {1.0, -2.0, 0.5};
  std::vector<double> before = params;
  sgd_step(params, {0.0, 0.0, 0.0}, st);
  CHECK(params == before);
  CHECK(st.velocity == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("single step without momentum history") {
  OptimizerState st = OptimizerState::make(1, 0.1, 0.9, 0.0);
  std::vector<double> params = {1.0};
  sgd_step(params, {1.0}, st);
  CHECK(params[0] == doctest::Approx(0.9));
  CHECK(st.velocity[0] == doctest::Approx(1.0));
}

TEST_CASE("two steps accumulate momentum") {
  OptimizerState st = OptimizerState::make(1, 0.1, 0.9, 0.0);
  std::vector<double> params = {1.0};
  sgd_step(params, {1.0}, st);
  sgd_step(params, {1.0}, st);
  // v2 = 0.9 * 1 + 1 = 1.9; p = 0.9 - 0.1 * 1.9 = 0.71
  CHECK(st.velocity[0] == doctest::Approx(1.9));
  CHECK(params[0] == doctest::Approx(0.71));
}

TEST_CASE("weight decay pulls parameters toward zero") {
  OptimizerState st = OptimizerState::make(1, 0.1, 0.0, 0.1);
  std::vector<double> params = {2.0};
  sgd_step(params, {0.0}, st);
  // v = 0 + (0 + 0.1 * 2) = 0.2; p = 2 - 0.1 * 0.2 = 1.98
  CHECK(params[0] == doctest::Approx(1.98));

  // decay direction flips with the sign of the parameter
  OptimizerState st2 = OptimizerState::make(1, 0.1, 0.0, 0.1);
  std::vector<double> neg = {-2.0};
  sgd_step(neg, {0.0}, st2);
  CHECK(neg[0] == doctest::Approx(-1.98));
}

TEST_CASE("combined momentum and decay worked example") {
  OptimizerState st = OptimizerState::make(2, 0.1, 0.5, 0.01);
  std::vector<double> params = {1.0, -1.0};
  sgd_step(params, {0.5, -0.5}, st);
  // v = (0.5 + 0.01, -0.5 - 0.01) = (0.51, -0.51); p -= 0.1 v
  CHECK(params[0] == doctest::Approx(1.0 - 0.051));
  CHECK(params[1] == doctest::Approx(-1.0 + 0.051));
  sgd_step(params, {0.5, -0.5}, st);
  // v = 0.5 * 0.51 + (0.5 + 0.01 * 0.949) = 0.76449
  CHECK(st.velocity[0] == doctest::Approx(0.5 * 0.51 + 0.5 + 0.01 * 0.949));
  CHECK(params[0] == doctest::Approx(0.949 - 0.1 * st.velocity[0]));
}

TEST_CASE("gradient descent on a quadratic converges") {
  // f(p) = (p - 3)^2, grad = 2 (p - 3)
  OptimizerState st = OptimizerState::make(1, 0.05, 0.9, 0.0);
  std::vector<double> params = {-4.0};
  // the heavy-ball contraction is ~sqrt(momentum) per step, so give it room
  for (int i = 0; i < 500; ++i) sgd_step(params, {2.0 * (params[0] - 3.0)}, st);
  CHECK(params[0] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("non-finite gradients abort the step") {
  OptimizerState st = OptimizerState::make(2, 0.1, 0.9, 0.0);
  std::vector<double> params = {1.0, 2.0};
  std::vector<double> before = params;
  CHECK_THROWS_AS(sgd_step(params, {0.0, std::numeric_limits<double>::quiet_NaN()}, st),
                  std::runtime_error);
  CHECK_THROWS_AS(sgd_step(params, {std::numeric_limits<double>::infinity(), 0.0}, st),
                  std::runtime_error);
  // parameters and velocity untouched by the failed step
  CHECK(params == before);
  CHECK(st.velocity == std::vector<double>{0.0, 0.0});
}

TEST_CASE("shape mismatches are rejected") {
  OptimizerState st = OptimizerState::make(2, 0.1, 0.9, 0.0);
  std::vector<double> params = {1.0, 2.0};
  CHECK_THROWS_AS(sgd_step(params, {1.0}, st), std::invalid_argument);
  std::vector<double> three = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(sgd_step(three, {1.0, 1.0, 1.0}, st), std::invalid_argument);
}

}  // TEST_SUITE
