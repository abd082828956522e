#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "glmcs/glm_family.hpp"
#include "glmcs/philox_rng.hpp"

using namespace glmcs;
using Catch::Approx;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(Eigen::Index(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("negative log likelihood matches the density") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();

  // Standard normal density at zero.
  CHECK(neg_log_likelihood(gauss, vec({1, 0}), 0.0, vec({0, 0})) ==
        Approx(0.5 * kLogTwoPi).epsilon(1e-12));
  // Fair coin.
  CHECK(neg_log_likelihood(logit, vec({1}), 1.0, vec({0})) ==
        Approx(std::log(2.0)).epsilon(1e-12));
  // N(1,1) density at y = 1 is 1/sqrt(2 pi): the -z y + psi(z) - log h(y)
  // pieces are -1, 1/2, and 1/2 + log(2 pi)/2.
  CHECK(neg_log_likelihood(gauss, vec({1}), 1.0, vec({1})) ==
        Approx(-1.0 + 0.5 + 0.5 + 0.5 * kLogTwoPi).epsilon(1e-12));

  CHECK_THROWS_AS(neg_log_likelihood(gauss, vec({1}),
                                     std::numeric_limits<double>::quiet_NaN(), vec({1})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      neg_log_likelihood(gauss, vec({std::numeric_limits<double>::infinity()}), 0.0, vec({1})),
      std::invalid_argument);
  CHECK_THROWS_AS(neg_log_likelihood(logit, vec({1}), 0.5, vec({0})), std::domain_error);
}

TEST_CASE("exp(-loss) integrates to one over the label space") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();
  const VectorXd x = vec({1.0});
  for (double th : {-1.5, 0.0, 0.7, 2.0}) {
    const VectorXd theta = vec({th});
    // Gaussian: trapezoid over y in [th - 12, th + 12].
    const int K = 8001;
    const double lo = th - 12.0, hi = th + 12.0;
    const double h = (hi - lo) / (K - 1);
    double mass = 0.0;
    for (int i = 0; i < K; ++i) {
      const double y = lo + i * h;
      const double w = (i == 0 || i == K - 1) ? 0.5 * h : h;
      mass += w * std::exp(-neg_log_likelihood(gauss, x, y, theta));
    }
    CHECK(mass == Approx(1.0).epsilon(1e-8));
    // Logistic: the two outcomes sum exactly.
    const double p1 = std::exp(-neg_log_likelihood(logit, x, 1.0, theta));
    const double p0 = std::exp(-neg_log_likelihood(logit, x, 0.0, theta));
    CHECK(p0 + p1 == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("loss gradient agrees with central finite differences") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();
  CounterRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd x = vec({rng.next_normal(), rng.next_normal()});
    const VectorXd theta = vec({rng.next_normal(), rng.next_normal()});
    for (const auto* family : {&gauss, &logit}) {
      const double y = family == &logit ? (rng.next_bernoulli(0.5) ? 1.0 : 0.0)
                                        : rng.next_normal();
      const VectorXd grad =
          (family->mean(theta.dot(x)) - y) * x;  // analytic form
      for (int j = 0; j < 2; ++j) {
        VectorXd lo = theta, hi = theta;
        lo[j] -= 1e-6;
        hi[j] += 1e-6;
        const double fd = (neg_log_likelihood(*family, x, y, hi) -
                           neg_log_likelihood(*family, x, y, lo)) /
                          2e-6;
        CHECK(fd == Approx(grad[j]).epsilon(1e-5).margin(1e-8));
      }
    }
  }
}

TEST_CASE("midpoint divergence values and properties") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();

  CHECK(midpoint_divergence(gauss, 0.0, 2.0) == Approx(0.5).epsilon(1e-12));
  CHECK(midpoint_divergence(gauss, 1.3, 1.3) == 0.0);
  CHECK(midpoint_divergence(logit, -0.4, -0.4) == 0.0);
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(1.0 + std::exp(2.0)) -
                          std::log(1.0 + std::exp(1.0));
  CHECK(midpoint_divergence(logit, 0.0, 2.0) == Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(
      midpoint_divergence(gauss, std::numeric_limits<double>::infinity(), 0.0),
      std::invalid_argument);

  CounterRng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double z = 6.0 * (rng.next_double() - 0.5);
    const double zp = 6.0 * (rng.next_double() - 0.5);
    for (const auto* family : {&gauss, &logit}) {
      const double v = midpoint_divergence(*family, z, zp);
      CHECK(v >= 0.0);
      CHECK(v == Approx(midpoint_divergence(*family, zp, z)).margin(1e-12));
      if (std::abs(z - zp) > 1e-3) CHECK(v > 0.0);  // strictly convex built-ins
    }
  }
}

TEST_CASE("shifted loss is the loss at the convex combination") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();
  const VectorXd x = vec({1.0});

  // eta = 1 collapses to the plain loss.
  CHECK(shifted_loss(logit, x, 1.0, vec({0.7}), vec({-2.0}), 1.0) ==
        Approx(neg_log_likelihood(logit, x, 1.0, vec({0.7}))).epsilon(1e-14));
  // theta = theta_star: the shift is invisible.
  CHECK(shifted_loss(gauss, x, 0.3, vec({1.1}), vec({1.1}), 0.25) ==
        Approx(neg_log_likelihood(gauss, x, 0.3, vec({1.1}))).epsilon(1e-14));
  // Half-way combination of 2 and 0 sits at 1.
  CHECK(shifted_loss(gauss, x, 0.0, vec({2.0}), vec({0.0}), 0.5) ==
        Approx(0.5 + 0.5 * kLogTwoPi).epsilon(1e-12));

  CHECK_THROWS_AS(shifted_loss(gauss, x, 0.0, vec({1}), vec({0}), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(shifted_loss(gauss, x, 0.0, vec({1}), vec({0}), 1.5),
                  std::invalid_argument);
}

TEST_CASE("truncation clamps") {
  CHECK(truncate(5.0, 2.0) == 2.0);
  CHECK(truncate(-5.0, 2.0) == -2.0);
  CHECK(truncate(1.0, 2.0) == 1.0);
  CHECK(truncate(37.0, std::numeric_limits<double>::infinity()) == 37.0);
  CHECK_THROWS_AS(truncate(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("label sampling matches the mean map") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();
  const int n = 100000;

  CounterRng rng(123);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_label(gauss, 0.0, rng);
  CHECK(std::abs(sum / n) < 0.02);

  CounterRng rng2(124);
  double ones = 0.0;
  for (int i = 0; i < n; ++i) ones += sample_label(logit, 10.0, rng2);
  CHECK(std::abs(ones / n - logit.mean(10.0)) < 0.005);

  CounterRng rng3(125);
  double heads = 0.0;
  for (int i = 0; i < n; ++i) heads += sample_label(logit, 0.0, rng3);
  CHECK(std::abs(heads / n - 0.5) < 0.01);

  // Deterministic under a fixed seed.
  CounterRng a(9, 1, 2), b(9, 1, 2);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_label(gauss, 0.3, a) == sample_label(gauss, 0.3, b));
}

TEST_CASE("family constants and shape invariants") {
  const auto& gauss = GlmFamily::gaussian();
  const auto& logit = GlmFamily::logistic();
  CHECK(gauss.smoothness == 1.0);
  CHECK(logit.smoothness == 0.25);
  CHECK(gauss.strong_convexity_at(3.0) == 1.0);
  const double mu1 = logit.mean(1.0);
  CHECK(logit.strong_convexity_at(1.0) == Approx(mu1 * (1.0 - mu1)).epsilon(1e-14));

  double prev_m = std::numeric_limits<double>::infinity();
  for (double b = 0.25; b <= 6.0; b += 0.25) {
    for (const auto* family : {&gauss, &logit}) {
      const double m = family->strong_convexity_at(b);
      CHECK(m >= 0.0);
      CHECK(m <= family->smoothness + 1e-15);
    }
    const double m_logit = logit.strong_convexity_at(b);
    if (prev_m < std::numeric_limits<double>::infinity()) CHECK(m_logit <= prev_m + 1e-15);
    prev_m = m_logit;
  }

  // psi'' within [0, M], mean map nondecreasing, m(b) really a lower bound.
  for (const auto* family : {&gauss, &logit}) {
    double prev_mean = -std::numeric_limits<double>::infinity();
    for (double z = -8.0; z <= 8.0; z += 0.05) {
      const double v = family->variance(z);
      CHECK(v >= 0.0);
      CHECK(v <= family->smoothness + 1e-15);
      const double mu = family->mean(z);
      CHECK(mu >= prev_mean - 1e-15);
      prev_mean = mu;
      if (std::abs(z) <= 2.0)
        CHECK(family->strong_convexity_at(2.0) <= v + 1e-15);
    }
  }

  // Logistic log-partition stays finite and exact in the far tails.
  CHECK(logit.log_partition(800.0) == Approx(800.0).epsilon(1e-12));
  CHECK(logit.log_partition(-800.0) == 0.0);
  CHECK_THROWS_AS(GlmFamily::by_name("poisson"), std::invalid_argument);
}
