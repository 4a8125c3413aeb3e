#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ranklab/stats.hpp"

using namespace ranklab;

TEST_SUITE("stats") {

TEST_CASE("mean, variance and stddev basics") {
  CHECK(mean_of({1, 2, 3, 4}) == doctest::Approx(2.5));
  CHECK(sample_variance({1, 2, 3}) == doctest::Approx(1.0));
  CHECK(sample_stddev({1, 2, 3}) == doctest::Approx(1.0));
  CHECK(sample_variance({5, 5, 5, 5}) == 0.0);
  CHECK_THROWS_AS(mean_of({}), std::invalid_argument);
  CHECK_THROWS_AS(sample_variance({1.0}), std::invalid_argument);
}

TEST_CASE("regularized incomplete beta identities") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x
  for (double x : {0.1, 0.25, 0.5, 0.9})
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
  // I_x(1, b) = 1 - (1-x)^b
  CHECK(regularized_incomplete_beta(1.0, 4.0, 0.3) ==
        doctest::Approx(1.0 - std::pow(0.7, 4.0)).epsilon(1e-12));
  // I_x(a, 1) = x^a
  CHECK(regularized_incomplete_beta(3.0, 1.0, 0.6) ==
        doctest::Approx(std::pow(0.6, 3.0)).epsilon(1e-12));
  // symmetry: I_x(a, b) = 1 - I_{1-x}(b, a)
  CHECK(regularized_incomplete_beta(2.5, 4.5, 0.35) ==
        doctest::Approx(1.0 - regularized_incomplete_beta(4.5, 2.5, 0.65)).epsilon(1e-12));
  // closed form: I_x(2, 2) = 3x^2 - 2x^3
  CHECK(regularized_incomplete_beta(2.0, 2.0, 0.4) ==
        doctest::Approx(3 * 0.16 - 2 * 0.064).epsilon(1e-12));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.1), std::invalid_argument);
}

TEST_CASE("student t cdf reference values") {
  // symmetry and midpoint
  CHECK(student_t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(student_t_cdf(1.3, 5.0) + student_t_cdf(-1.3, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  // dof = 1 is the Cauchy distribution: F(t) = 1/2 + atan(t)/pi
  for (double t : {-2.0, -0.5, 0.7, 3.0})
    CHECK(student_t_cdf(t, 1.0) ==
          doctest::Approx(0.5 + std::atan(t) / M_PI).epsilon(1e-10));
  // dof = 2 closed form: F(t) = 1/2 + t / (2 sqrt(2 + t^2))
  for (double t : {-1.5, 0.3, 2.2})
    CHECK(student_t_cdf(t, 2.0) ==
          doctest::Approx(0.5 + t / (2.0 * std::sqrt(2.0 + t * t))).epsilon(1e-10));
  // large dof approaches the normal distribution
  CHECK(student_t_cdf(1.96, 1e6) == doctest::Approx(0.975).epsilon(1e-4));
  CHECK_THROWS_AS(student_t_cdf(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("welch t test pinned fixture") {
  WelchResult r = welch_t_test({1, 2, 3}, {4, 5, 6});
  CHECK(r.t == doctest::Approx(-3.674).epsilon(1e-3));
  CHECK(r.dof == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.p_two_sided == doctest::Approx(0.0213).epsilon(2e-2));
}

TEST_CASE("welch t test properties") {
  // swapping samples flips t, keeps dof and p
  WelchResult a = welch_t_test({1.0, 1.5, 2.5, 0.5}, {3.0, 2.8, 3.3});
  WelchResult b = welch_t_test({3.0, 2.8, 3.3}, {1.0, 1.5, 2.5, 0.5});
  CHECK(a.t == doctest::Approx(-b.t).epsilon(1e-12));
  CHECK(a.dof == doctest::Approx(b.dof).epsilon(1e-12));
  CHECK(a.p_two_sided == doctest::Approx(b.p_two_sided).epsilon(1e-12));

  // identical samples: t = 0, p = 1
  WelchResult same = welch_t_test({1, 2, 3, 4}, {4, 3, 2, 1});
  CHECK(same.t == doctest::Approx(0.0));
  CHECK(same.p_two_sided == doctest::Approx(1.0));

  // equal-variance case reduces to the pooled formula's dof = n1 + n2 - 2
  WelchResult ev = welch_t_test({1, 2, 3}, {11, 12, 13});
  CHECK(ev.dof == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(ev.p_two_sided < 0.001);

  CHECK_THROWS_AS(welch_t_test({1.0}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(welch_t_test({1, 2}, {}), std::invalid_argument);
}

TEST_CASE("welch degenerate zero-variance cases") {
  // both samples constant and equal: no evidence of difference
  WelchResult flat = welch_t_test({2, 2, 2}, {2, 2, 2});
  CHECK(flat.p_two_sided == doctest::Approx(1.0));
  // both constant but different: maximal evidence
  WelchResult apart = welch_t_test({1, 1, 1}, {2, 2, 2});
  CHECK(apart.p_two_sided == doctest::Approx(0.0));
}

TEST_CASE("fit gaussian") {
  GaussianFit f = fit_gaussian({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(f.mean == doctest::Approx(5.0));
  CHECK(f.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));

  std::mt19937_64 gen(31);
  std::normal_distribution<double> dist(3.0, 0.5);
  std::vector<double> xs(20000);
  for (double& x : xs) x = dist(gen);
  GaussianFit g = fit_gaussian(xs);
  CHECK(g.mean == doctest::Approx(3.0).epsilon(0.02));
  CHECK(g.stddev == doctest::Approx(0.5).epsilon(0.03));
}

}  // TEST_SUITE
