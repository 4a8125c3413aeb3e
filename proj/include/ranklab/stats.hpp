#pragma once

#include <vector>

namespace ranklab {

double mean_of(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Cumulative distribution of Student's t with (possibly fractional)
/// degrees of freedom.
double student_t_cdf(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
};

/// Welch's unequal-variance two-sample t-test; both samples need n >= 2.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct GaussianFit {
  double mean = 0.0;
  double stddev = 0.0;
};

GaussianFit fit_gaussian(const std::vector<double>& xs);

}  // namespace ranklab
