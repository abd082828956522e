#pragma once
// The confidence-set families.
//
//   likelihood-ratio set   { theta : sum_t (loss_t(theta) - loss_t(ref)) <= beta }
//     with ref the ridge-regularized minimizer and
//     beta = ||ref||^2/(2 gamma^2) + (1/2) log det(gamma^2 M Gram + Id) + log(1/delta).
//     Anytime-valid. Rank-adaptive and worst-case widths are carried alongside.
//
//   Bregman ball           { theta : B_Psi(theta, center) <= radius },
//     Psi(theta) = sum_t psi(<x_t, theta>), center the polar-constrained MLE,
//     radius = d log(1 + 2 kappa) + 2 log(1/delta), kappa = M / m(b).
//     Fixed-n validity; the radius is independent of n and covariate scale.
//
//   pseudo-label ellipsoid { theta : (1/2) sum_t (<theta, x_t> - yhat_t)^2 <= beta },
//     kept as (gram, moment, offset) so membership is one quadratic form,
//     beta = (2/m) regret + (4/m) log(1/delta). The regret term is either the
//     realized regret against the true parameter (oracle mode) or a uniform
//     bound (bound mode); the mode is recorded and never mixed silently.
//
// All membership inequalities are closed (<=).

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "glmcs/estimators.hpp"
#include "glmcs/glm_family.hpp"
#include "glmcs/info_gain.hpp"
#include "glmcs/observation_log.hpp"
#include "glmcs/posterior.hpp"

namespace glmcs {

enum class WidthMode { oracle, bound };

inline const char* to_string(WidthMode mode) {
  return mode == WidthMode::oracle ? "oracle" : "bound";
}

struct LikelihoodRatioSet {
  GlmFamily family;
  ObservationLog rounds;
  Eigen::VectorXd reference;
  double beta = 0.0;
  double delta = 0.0;
  double beta_rank = 0.0;        // width with the rank-adaptive log-det cap
  double beta_worst_case = 0.0;  // width with the covariate-norm cap

  double excess_loss(const Eigen::VectorXd& theta) const {
    return cumulative_loss(rounds, family, theta) -
           cumulative_loss(rounds, family, reference);
  }
  bool contains(const Eigen::VectorXd& theta) const { return excess_loss(theta) <= beta; }
};

struct BregmanBall {
  GlmFamily family;
  ObservationLog rounds;
  Eigen::VectorXd center;
  double radius = 0.0;
  double delta = 0.0;
  double b = 0.0;
  double kappa = 0.0;

  double log_partition_sum(const Eigen::VectorXd& theta) const {
    double total = 0.0;
    for (std::size_t t = 0; t < rounds.size(); ++t)
      total += family.log_partition(theta.dot(rounds.covariate(t)));
    return total;
  }
  double divergence_from_center(const Eigen::VectorXd& theta) const {
    double value = log_partition_sum(theta) - log_partition_sum(center);
    for (std::size_t t = 0; t < rounds.size(); ++t) {
      const Eigen::VectorXd& x = rounds.covariate(t);
      value -= family.mean(center.dot(x)) * x.dot(theta - center);
    }
    return value;
  }
  bool contains(const Eigen::VectorXd& theta) const {
    return divergence_from_center(theta) <= radius;
  }
};

struct PseudoLabelEllipsoid {
  Eigen::MatrixXd gram;
  Eigen::VectorXd moment;  // sum_t yhat_t x_t
  double offset = 0.0;     // (1/2) sum_t yhat_t^2
  double beta = 0.0;
  double delta = 0.0;
  WidthMode mode = WidthMode::oracle;

  double quadratic_form(const Eigen::VectorXd& theta) const {
    return 0.5 * theta.dot(gram * theta) - theta.dot(moment) + offset;
  }
  bool contains(const Eigen::VectorXd& theta) const {
    return quadratic_form(theta) <= beta;
  }
  Eigen::VectorXd center() const {  // pseudo-inverse solve, for reporting
    return gram.completeOrthogonalDecomposition().solve(moment);
  }
};

inline LikelihoodRatioSet make_analytic_set(const ObservationLog& log, const GlmFamily& family,
                                            double gamma, double delta) {
  if (!(gamma > 0.0)) throw std::invalid_argument("make_analytic_set: gamma must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("make_analytic_set: delta must lie in (0, 1)");
  SolveReport fit = ridge_mle(log, family, gamma, 1.0);
  if (!fit.converged)
    throw std::runtime_error("make_analytic_set: ridge solve did not converge");
  LikelihoodRatioSet set{family, log, fit.solution, 0.0, delta, 0.0, 0.0};
  const double rho_hat = fit.solution.squaredNorm() / (2.0 * gamma * gamma);
  const double log_inv_delta = std::log(1.0 / delta);
  const double alpha = gamma * gamma * family.smoothness;
  set.beta = rho_hat + info_gain_bound(log.gram(), family.smoothness, gamma, 1.0) +
             log_inv_delta;
  const std::size_t n = log.size();
  const double cov_norm = log.max_covariate_norm();
  set.beta_rank =
      rho_hat + (n == 0 ? 0.0 : 0.5 * logdet_rank_bound(log.gram(), alpha, cov_norm, n)) +
      log_inv_delta;
  const double d = double(log.dim());
  set.beta_worst_case =
      rho_hat + 0.5 * d * std::log1p(alpha * cov_norm * cov_norm * double(n) / d) +
      log_inv_delta;
  return set;
}

inline BregmanBall make_transductive_set(const ObservationLog& log, const GlmFamily& family,
                                         double b, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("make_transductive_set: delta must lie in (0, 1)");
  const double m = family.strong_convexity_at(b);
  if (!(m > 0.0))
    throw std::domain_error("make_transductive_set: strong convexity unavailable at this b");
  SolveReport fit = constrained_mle(log, family, b);
  if (!fit.converged)
    throw std::runtime_error("make_transductive_set: constrained solve did not converge");
  BregmanBall set{family, log, fit.solution, 0.0, delta, b, family.smoothness / m};
  set.radius = double(log.dim()) * std::log1p(2.0 * set.kappa) + 2.0 * std::log(1.0 / delta);
  return set;
}

inline PseudoLabelEllipsoid make_det_algorithmic_set(const std::vector<double>& pseudo_labels,
                                                     const ObservationLog& rounds, double m,
                                                     double regret_term, double delta,
                                                     WidthMode mode) {
  if (!(m > 0.0))
    throw std::domain_error("make_det_algorithmic_set: strong convexity unavailable");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("make_det_algorithmic_set: delta must lie in (0, 1)");
  if (pseudo_labels.size() != rounds.size())
    throw std::invalid_argument("make_det_algorithmic_set: pseudo-label count mismatch");
  PseudoLabelEllipsoid set;
  set.gram = rounds.gram();
  set.moment = Eigen::VectorXd::Zero(rounds.dim());
  set.offset = 0.0;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    set.moment.noalias() += pseudo_labels[t] * rounds.covariate(t);
    set.offset += 0.5 * pseudo_labels[t] * pseudo_labels[t];
  }
  set.beta = (2.0 / m) * regret_term + (4.0 / m) * std::log(1.0 / delta);
  set.delta = delta;
  set.mode = mode;
  return set;
}

// Replays the EWA chain (learning rate 1/2) over the log, collecting the
// post-update pseudo-labels; the regret term is supplied by the caller in the
// declared mode.
inline PseudoLabelEllipsoid make_ewa_algorithmic_set(const Posterior& prior,
                                                     const ObservationLog& log,
                                                     const GlmFamily& family, double b,
                                                     double delta, WidthMode mode,
                                                     double regret_term) {
  if (prior.lambda != 0.5)
    throw std::invalid_argument(
        "make_ewa_algorithmic_set: the chain must run at learning rate 1/2");
  const double m = family.strong_convexity_at(b);
  if (!(m > 0.0))
    throw std::domain_error("make_ewa_algorithmic_set: strong convexity unavailable at this b");
  Posterior chain = prior;
  std::vector<double> labels(log.size());
  for (std::size_t t = 0; t < log.size(); ++t) {
    ewa_absorb(chain, log.covariate(t), log.label(t));
    labels[t] = pseudo_label(chain, log.covariate(t), b);
  }
  return make_det_algorithmic_set(labels, log, m, regret_term, delta, mode);
}

// Width of the sparse-comparator pseudo-label sequence, usable without
// running any forecaster integral.
inline double sparse_width(std::size_t n, int d, int s, double smoothness, double norm_bound,
                           double linf_bound, double m, double delta) {
  if (s < 1 || s > d) throw std::invalid_argument("sparse_width: s must lie in [1, d]");
  if (!(m > 0.0)) throw std::invalid_argument("sparse_width: m must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("sparse_width: delta must lie in (0, 1)");
  const double inside = 1.0 + smoothness * norm_bound * norm_bound * linf_bound * linf_bound *
                                  double(n) / 2.0;
  return (4.0 * s / m) *
             std::log(2.0 * std::exp(1.0) * double(d) * std::sqrt(inside) / double(s)) +
         (4.0 / m) * std::log(2.0 * std::sqrt(std::exp(1.0)) / delta);
}

struct WidthReport {
  double beta = 0.0;
  // likelihood-ratio sets: directional extent from the reference along
  // +e_j / -e_j for each axis; ellipsoids: semi-axis lengths; balls: radius.
  std::vector<double> axis_metrics;
};

namespace detail {

// Largest step s with excess(ref + s * dir) <= beta, by doubling + bisection.
inline double directional_extent(const LikelihoodRatioSet& set, const Eigen::VectorXd& dir,
                                 double tol = 1e-6) {
  const auto over = [&](double s) {
    return set.excess_loss(set.reference + s * dir) > set.beta;
  };
  double hi = 1.0;
  int doublings = 0;
  while (!over(hi)) {
    hi *= 2.0;
    if (++doublings > 200) return std::numeric_limits<double>::infinity();
  }
  double lo = hi * 0.5 > 1.0 ? hi * 0.5 : 0.0;
  if (over(lo)) lo = 0.0;
  while (hi - lo > tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    (over(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline WidthReport width_report(const LikelihoodRatioSet& set) {
  WidthReport report;
  report.beta = set.beta;
  for (Eigen::Index j = 0; j < set.rounds.dim(); ++j) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(set.rounds.dim());
    dir[j] = 1.0;
    report.axis_metrics.push_back(detail::directional_extent(set, dir));
    dir[j] = -1.0;
    report.axis_metrics.push_back(detail::directional_extent(set, dir));
  }
  return report;
}

inline WidthReport width_report(const BregmanBall& set) {
  return WidthReport{set.radius, {set.radius}};
}

inline WidthReport width_report(const PseudoLabelEllipsoid& set) {
  WidthReport report;
  report.beta = set.beta;
  const Eigen::VectorXd c = set.center();
  const double effective = set.beta - set.quadratic_form(c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(set.gram);
  const double top = eig.eigenvalues().maxCoeff();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double mu = eig.eigenvalues()[i];
    if (mu <= 1e-12 * std::max(1.0, top))
      report.axis_metrics.push_back(std::numeric_limits<double>::infinity());
    else
      report.axis_metrics.push_back(effective > 0.0 ? std::sqrt(2.0 * effective / mu) : 0.0);
  }
  return report;
}

inline nlohmann::json set_descriptor(const LikelihoodRatioSet& set) {
  nlohmann::json j;
  j["type"] = "likelihood_ratio";
  j["reference"] = std::vector<double>(set.reference.begin(), set.reference.end());
  j["beta"] = set.beta;
  j["beta_rank"] = set.beta_rank;
  j["beta_worst_case"] = set.beta_worst_case;
  j["delta"] = set.delta;
  j["gram"] = std::vector<double>(set.rounds.gram().reshaped<Eigen::RowMajor>().begin(),
                                  set.rounds.gram().reshaped<Eigen::RowMajor>().end());
  j["mode"] = nullptr;
  j["family"] = set.family.name;
  j["n"] = set.rounds.size();
  return j;
}

inline nlohmann::json set_descriptor(const BregmanBall& set) {
  nlohmann::json j;
  j["type"] = "bregman_ball";
  j["center"] = std::vector<double>(set.center.begin(), set.center.end());
  j["beta"] = set.radius;
  j["delta"] = set.delta;
  j["gram"] = std::vector<double>(set.rounds.gram().reshaped<Eigen::RowMajor>().begin(),
                                  set.rounds.gram().reshaped<Eigen::RowMajor>().end());
  j["mode"] = nullptr;
  j["b"] = set.b;
  j["kappa"] = set.kappa;
  j["family"] = set.family.name;
  j["n"] = set.rounds.size();
  return j;
}

inline nlohmann::json set_descriptor(const PseudoLabelEllipsoid& set) {
  nlohmann::json j;
  j["type"] = "pseudo_label_ellipsoid";
  const Eigen::VectorXd c = set.center();
  j["center"] = std::vector<double>(c.begin(), c.end());
  j["beta"] = set.beta;
  j["delta"] = set.delta;
  j["gram"] = std::vector<double>(set.gram.reshaped<Eigen::RowMajor>().begin(),
                                  set.gram.reshaped<Eigen::RowMajor>().end());
  j["moment"] = std::vector<double>(set.moment.begin(), set.moment.end());
  j["offset"] = set.offset;
  j["mode"] = to_string(set.mode);
  return j;
}

}  // namespace glmcs
