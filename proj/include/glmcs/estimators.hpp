#pragma once
// Point estimators the confidence sets are anchored at.
//
// ridge_mle       minimizes lambda * sum_t loss_t(theta) + ||theta||^2/(2 gamma^2)
//                 by damped Newton with Armijo backtracking.
// constrained_mle minimizes sum_t loss_t over the polar slab intersection
//                 { theta : max_t |<theta, x_t>| <= b }. An unconstrained
//                 Newton solve is tried first; if its minimizer is infeasible
//                 (or does not exist, e.g. separable logistic data), projected
//                 gradient with Dykstra projection onto the slabs takes over.
// restricted_mle  solves the ridge problem with coordinates outside a given
//                 support pinned to zero.
//
// Non-convergence is reported through SolveReport::converged, never as a
// silently wrong answer.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "glmcs/glm_family.hpp"
#include "glmcs/observation_log.hpp"

namespace glmcs {

inline double cumulative_loss(const ObservationLog& log, const GlmFamily& family,
                              const Eigen::VectorXd& theta) {
  double total = 0.0;
  for (std::size_t t = 0; t < log.size(); ++t)
    total += link_loss(family, theta.dot(log.covariate(t)), log.label(t));
  return total;
}

inline Eigen::VectorXd cumulative_loss_gradient(const ObservationLog& log,
                                                const GlmFamily& family,
                                                const Eigen::VectorXd& theta) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(log.dim());
  for (std::size_t t = 0; t < log.size(); ++t) {
    const Eigen::VectorXd& x = log.covariate(t);
    g.noalias() += (family.mean(theta.dot(x)) - log.label(t)) * x;
  }
  return g;
}

inline Eigen::MatrixXd cumulative_loss_hessian(const ObservationLog& log,
                                               const GlmFamily& family,
                                               const Eigen::VectorXd& theta) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(log.dim(), log.dim());
  for (std::size_t t = 0; t < log.size(); ++t) {
    const Eigen::VectorXd& x = log.covariate(t);
    h.noalias() += family.variance(theta.dot(x)) * (x * x.transpose());
  }
  return h;
}

struct SolveReport {
  Eigen::VectorXd solution;
  double objective = 0.0;
  double gradient_norm = 0.0;  // stationarity residual for constrained solves
  int iterations = 0;
  bool converged = false;
};

namespace detail {

struct NewtonOptions {
  double gamma = 0.0;       // 0 disables the ridge term
  double lambda = 1.0;
  int max_iterations = 200;
  double tol_scale = 1e-10;
  double divergence_norm = 1e8;
};

// Damped Newton on f = lambda * sum loss + ||theta||^2/(2 gamma^2).
inline SolveReport newton_solve(const ObservationLog& log, const GlmFamily& family,
                                Eigen::VectorXd theta, const NewtonOptions& opt) {
  const double inv_g2 = opt.gamma > 0.0 ? 1.0 / (opt.gamma * opt.gamma) : 0.0;
  const auto objective = [&](const Eigen::VectorXd& th) {
    return opt.lambda * cumulative_loss(log, family, th) + 0.5 * inv_g2 * th.squaredNorm();
  };
  SolveReport report;
  double f = objective(theta);
  Eigen::VectorXd g = opt.lambda * cumulative_loss_gradient(log, family, theta) + inv_g2 * theta;
  const double tol = opt.tol_scale * std::max(1.0, g.norm());
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (g.norm() <= tol) {
      report.converged = true;
      break;
    }
    Eigen::MatrixXd h = opt.lambda * cumulative_loss_hessian(log, family, theta);
    h.diagonal().array() += inv_g2;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) break;  // flat direction, no interior minimizer
    const Eigen::VectorXd step = llt.solve(-g);
    const double predicted_decrease = -0.5 * g.dot(step);
    if (step.norm() <= 1e-6 * (1.0 + theta.norm()) ||
        predicted_decrease <= 1e-12 * (1.0 + std::abs(f))) {
      // Inside the quadratic-convergence basin the objective can no longer
      // resolve decreases; take the plain Newton step.
      theta += step;
      f = objective(theta);
    } else {
      const double slope = g.dot(step);
      double alpha = 1.0;
      double f_next = objective(theta + alpha * step);
      int backtracks = 0;
      while (f_next > f + 1e-4 * alpha * slope && backtracks < 60) {
        alpha *= 0.5;
        f_next = objective(theta + alpha * step);
        ++backtracks;
      }
      if (backtracks >= 60) break;
      theta += alpha * step;
      f = f_next;
    }
    g = opt.lambda * cumulative_loss_gradient(log, family, theta) + inv_g2 * theta;
    report.iterations = it + 1;
    if (theta.norm() > opt.divergence_norm) break;  // minimizer escapes to infinity
  }
  if (!report.converged && g.norm() <= tol) report.converged = true;
  report.solution = theta;
  report.objective = f;
  report.gradient_norm = g.norm();
  return report;
}

// Dykstra's alternating projection onto the intersection of the slabs
// { |<theta, x_t>| <= b }.
inline Eigen::VectorXd project_polar(const ObservationLog& log, double b,
                                     Eigen::VectorXd v, int max_sweeps = 10000,
                                     double tol = 1e-12) {
  const std::size_t n = log.size();
  std::vector<Eigen::VectorXd> corrections(n, Eigen::VectorXd::Zero(v.size()));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::VectorXd before = v;
    for (std::size_t t = 0; t < n; ++t) {
      const Eigen::VectorXd& x = log.covariate(t);
      const double nx2 = x.squaredNorm();
      const Eigen::VectorXd w = v + corrections[t];
      const double c = x.dot(w);
      Eigen::VectorXd projected = w;
      if (nx2 > 0.0 && std::abs(c) > b)
        projected = w - ((c - std::copysign(b, c)) / nx2) * x;
      corrections[t] = w - projected;
      v = projected;
    }
    if ((v - before).lpNorm<Eigen::Infinity>() <= tol) break;
  }
  return v;
}

}  // namespace detail

inline SolveReport ridge_mle(const ObservationLog& log, const GlmFamily& family,
                             double gamma, double lambda) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ridge_mle: gamma must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge_mle: lambda must be positive");
  detail::NewtonOptions opt;
  opt.gamma = gamma;
  opt.lambda = lambda;
  return detail::newton_solve(log, family, Eigen::VectorXd::Zero(log.dim()), opt);
}

inline SolveReport constrained_mle(const ObservationLog& log, const GlmFamily& family,
                                   double b) {
  if (!(b > 0.0)) throw std::invalid_argument("constrained_mle: b must be positive");
  if (log.empty()) throw std::invalid_argument("constrained_mle: log is empty");
  const Eigen::Index d = log.dim();

  const auto max_abs_link = [&](const Eigen::VectorXd& th) {
    double m = 0.0;
    for (std::size_t t = 0; t < log.size(); ++t)
      m = std::max(m, std::abs(th.dot(log.covariate(t))));
    return m;
  };

  // Interior shortcut: if the unconstrained minimizer exists and is feasible,
  // it is the constrained minimizer.
  {
    detail::NewtonOptions opt;
    opt.lambda = 1.0;
    opt.tol_scale = 1e-11;
    opt.max_iterations = 100;
    SolveReport interior =
        detail::newton_solve(log, family, Eigen::VectorXd::Zero(d), opt);
    if (interior.converged && max_abs_link(interior.solution) <= b * (1.0 + 1e-12)) {
      interior.gradient_norm =
          (interior.solution -
           detail::project_polar(log, b,
                                 interior.solution -
                                     cumulative_loss_gradient(log, family, interior.solution)))
              .norm();
      return interior;
    }
  }

  // Projected gradient with step 1/L, L = M * lambda_max(gram).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(log.gram());
  const double lip = family.smoothness * eig.eigenvalues().maxCoeff();
  SolveReport report;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  if (lip <= 0.0) {  // all covariates zero: loss constant, origin optimal
    report.solution = theta;
    report.objective = cumulative_loss(log, family, theta);
    report.converged = true;
    return report;
  }
  const double step = 1.0 / lip;
  const int max_iterations = 20000;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd g = cumulative_loss_gradient(log, family, theta);
    const Eigen::VectorXd next = detail::project_polar(log, b, theta - step * g);
    residual = (theta - next).norm() / step;
    theta = next;
    report.iterations = it + 1;
    if (residual <= 1e-8 * std::max(1.0, g.norm())) {
      report.converged = true;
      break;
    }
    if (theta.norm() > 1e6 && residual > 1.0) break;  // unbounded flat direction
  }
  report.solution = theta;
  report.objective = cumulative_loss(log, family, theta);
  report.gradient_norm = residual;
  return report;
}

inline SolveReport restricted_mle(const ObservationLog& log, const GlmFamily& family,
                                  const std::vector<int>& support, double gamma,
                                  double lambda) {
  if (!(gamma > 0.0)) throw std::invalid_argument("restricted_mle: gamma must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("restricted_mle: lambda must be positive");
  std::vector<int> s = support;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (int j : s)
    if (j < 0 || j >= log.dim())
      throw std::invalid_argument("restricted_mle: support index out of range");

  if (s.empty()) {
    SolveReport report;
    report.solution = Eigen::VectorXd::Zero(log.dim());
    report.objective = lambda * cumulative_loss(log, family, report.solution);
    report.converged = true;
    return report;
  }

  SolveReport sub = ridge_mle(log.restricted(s), family, gamma, lambda);
  SolveReport report;
  report.solution = Eigen::VectorXd::Zero(log.dim());
  for (std::size_t k = 0; k < s.size(); ++k) report.solution[s[k]] = sub.solution[k];
  report.objective = sub.objective;
  report.gradient_norm = sub.gradient_norm;
  report.iterations = sub.iterations;
  report.converged = sub.converged;
  return report;
}

}  // namespace glmcs
