#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "glmcs/estimators.hpp"
#include "glmcs/philox_rng.hpp"

using namespace glmcs;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ObservationLog single(double x0, double x1, double y) {
  ObservationLog log(2);
  log.append((VectorXd(2) << x0, x1).finished(), y);
  return log;
}

ObservationLog random_log(const GlmFamily& family, int d, int n, uint64_t seed,
                          const VectorXd& theta_star, double scale = 1.0) {
  CounterRng cov(seed, 0, 1), lab(seed, 0, 2);
  ObservationLog log(d);
  for (int t = 0; t < n; ++t) {
    cov.seek_round(uint32_t(t));
    lab.seek_round(uint32_t(t));
    VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = scale * cov.next_normal();
    log.append(x, sample_label(family, theta_star.dot(x), lab));
  }
  return log;
}

}  // namespace

TEST_CASE("ridge mle basics") {
  const auto& gauss = GlmFamily::gaussian();

  // Empty log: the regularizer's unique minimizer is the origin.
  const SolveReport zero = ridge_mle(ObservationLog(3), gauss, 1.0, 1.0);
  CHECK(zero.converged);
  CHECK(zero.solution.norm() == 0.0);

  // Scalar ridge closed form y / (1 + 1/gamma^2).
  const SolveReport scalar = ridge_mle(single(1.0, 0.0, 3.0), gauss, 1.0, 1.0);
  CHECK(scalar.converged);
  CHECK(scalar.solution[0] == Approx(1.5).epsilon(1e-10));
  CHECK(scalar.solution[1] == Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(ridge_mle(ObservationLog(1), gauss, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ridge_mle(ObservationLog(1), gauss, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("logistic ridge matches a dense grid search") {
  const auto& logit = GlmFamily::logistic();
  ObservationLog log(1);
  for (int t = 0; t < 20; ++t) log.append(VectorXd::Ones(1), t < 14 ? 1.0 : 0.0);
  const double gamma = 10.0;
  const SolveReport fit = ridge_mle(log, logit, gamma, 1.0);
  REQUIRE(fit.converged);

  double best_theta = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (double th = -4.0; th <= 4.0; th += 1e-4) {
    const VectorXd v = VectorXd::Constant(1, th);
    const double value = cumulative_loss(log, logit, v) + th * th / (2.0 * gamma * gamma);
    if (value < best_value) {
      best_value = value;
      best_theta = th;
    }
  }
  CHECK(fit.solution[0] == Approx(best_theta).margin(1e-3));
}

TEST_CASE("gaussian ridge equals the linear-algebra closed form") {
  const auto& gauss = GlmFamily::gaussian();
  CounterRng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3;
    VectorXd theta_star(d);
    for (int j = 0; j < d; ++j) theta_star[j] = rng.next_normal();
    const double gamma = 0.5 + 2.0 * rng.next_double();
    const double lambda = 0.25 + rng.next_double();
    const ObservationLog log = random_log(gauss, d, 25, 1000 + uint64_t(trial), theta_star);
    const SolveReport fit = ridge_mle(log, gauss, gamma, lambda);
    REQUIRE(fit.converged);
    const MatrixXd a = lambda * log.gram() + MatrixXd::Identity(d, d) / (gamma * gamma);
    const VectorXd closed = a.ldlt().solve(lambda * log.label_covariate_sum());
    CHECK((fit.solution - closed).norm() <= 1e-8);
    const VectorXd g = lambda * cumulative_loss_gradient(log, gauss, fit.solution) +
                       fit.solution / (gamma * gamma);
    CHECK(g.norm() <= 1e-9);
  }
}

TEST_CASE("constrained mle reduces to the interior solution when feasible") {
  const auto& gauss = GlmFamily::gaussian();
  VectorXd theta_star = (VectorXd(2) << 0.4, -0.2).finished();
  const ObservationLog log = random_log(gauss, 2, 60, 4242, theta_star);
  const SolveReport unconstrained = ridge_mle(log, gauss, 1e6, 1.0);  // near-MLE
  const SolveReport constrained = constrained_mle(log, gauss, 50.0);
  REQUIRE(constrained.converged);
  CHECK((constrained.solution - unconstrained.solution).norm() <= 1e-6);

  CHECK_THROWS_AS(constrained_mle(log, gauss, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(constrained_mle(ObservationLog(2), gauss, 1.0), std::invalid_argument);
}

TEST_CASE("constrained mle clips a one-dimensional mean") {
  const auto& gauss = GlmFamily::gaussian();
  ObservationLog log(1);
  for (int t = 0; t < 3; ++t) log.append(VectorXd::Ones(1), 5.0);
  const SolveReport fit = constrained_mle(log, gauss, 2.0);
  REQUIRE(fit.converged);
  CHECK(fit.solution[0] == Approx(2.0).margin(1e-8));
}

TEST_CASE("separable logistic data pushes the solution to the boundary") {
  const auto& logit = GlmFamily::logistic();
  ObservationLog log(2);
  log.append((VectorXd(2) << 1.0, 0.3).finished(), 1.0);
  log.append((VectorXd(2) << 0.8, -0.1).finished(), 1.0);
  log.append((VectorXd(2) << -1.0, 0.2).finished(), 0.0);
  log.append((VectorXd(2) << -0.7, -0.4).finished(), 0.0);
  const SolveReport fit = constrained_mle(log, logit, 1.0);
  REQUIRE(fit.converged);
  double max_link = 0.0;
  for (std::size_t t = 0; t < log.size(); ++t)
    max_link = std::max(max_link, std::abs(fit.solution.dot(log.covariate(t))));
  CHECK(max_link == Approx(1.0).margin(1e-6));
  CHECK(max_link <= 1.0 + 1e-9);

  // First-order condition along 100 random feasible directions.
  const VectorXd g = cumulative_loss_gradient(log, logit, fit.solution);
  CounterRng rng(5150);
  int checked = 0;
  while (checked < 100) {
    VectorXd probe(2);
    probe[0] = 2.0 * (rng.next_double() - 0.5);
    probe[1] = 2.0 * (rng.next_double() - 0.5);
    double worst = 0.0;
    for (std::size_t t = 0; t < log.size(); ++t)
      worst = std::max(worst, std::abs(probe.dot(log.covariate(t))));
    if (worst > 1.0) continue;
    ++checked;
    CHECK((probe - fit.solution).dot(g) >= -1e-6);
  }
}

TEST_CASE("restricted mle") {
  const auto& gauss = GlmFamily::gaussian();
  ObservationLog log(2);
  log.append((VectorXd(2) << 1.0, 0.0).finished(), 2.0);
  log.append((VectorXd(2) << 0.0, 1.0).finished(), -1.0);
  log.append((VectorXd(2) << 1.0, 1.0).finished(), 0.5);

  // Full support equals the ridge solution.
  const SolveReport full = restricted_mle(log, gauss, {0, 1}, 2.0, 1.0);
  const SolveReport ridge = ridge_mle(log, gauss, 2.0, 1.0);
  CHECK((full.solution - ridge.solution).norm() <= 1e-10);
  CHECK(full.objective == Approx(ridge.objective).epsilon(1e-12));

  // Empty support pins everything at zero.
  const SolveReport none = restricted_mle(log, gauss, {}, 2.0, 1.0);
  CHECK(none.solution.norm() == 0.0);
  CHECK(none.objective == Approx(cumulative_loss(log, gauss, none.solution)).epsilon(1e-12));

  // Singleton support: one-dimensional ridge closed form, other coordinate zero.
  ObservationLog axes(2);
  axes.append((VectorXd(2) << 1.0, 0.0).finished(), 2.0);
  axes.append((VectorXd(2) << 0.0, 1.0).finished(), -1.0);
  const double gamma = 1.5;
  const SolveReport sub = restricted_mle(axes, gauss, {0}, gamma, 1.0);
  CHECK(sub.solution[1] == 0.0);
  CHECK(sub.solution[0] == Approx(2.0 / (1.0 + 1.0 / (gamma * gamma))).epsilon(1e-10));

  // Restriction cannot improve the objective.
  for (const std::vector<int>& support :
       {std::vector<int>{}, std::vector<int>{0}, std::vector<int>{1}}) {
    const SolveReport r = restricted_mle(log, gauss, support, 2.0, 1.0);
    CHECK(r.objective >= ridge.objective - 1e-10);
  }
  CHECK_THROWS_AS(restricted_mle(log, gauss, {5}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("constrained objective never beats the looser problem") {
  const auto& gauss = GlmFamily::gaussian();
  VectorXd theta_star = (VectorXd(2) << 1.5, 0.0).finished();
  const ObservationLog log = random_log(gauss, 2, 40, 999, theta_star);
  const SolveReport loose = constrained_mle(log, gauss, 100.0);
  const SolveReport tight = constrained_mle(log, gauss, 0.2);
  REQUIRE(loose.converged);
  REQUIRE(tight.converged);
  CHECK(tight.objective >= loose.objective - 1e-9);
}
