#pragma once
// Exponentially-weighted-average mixture forecaster.
//
// A posterior q_t over parameters is tilted by the losses each round,
//   dq_{t+1}/dq_t propto exp(-lambda * loss_t),
// and predicts through the scaled log loss
//   L_{t,lambda}(q) = -(1/lambda) log int exp(-lambda * loss_t) dq.
//
// Three representations are kept behind one value type:
//   conjugate  exact Gaussian posterior (gaussian family, quadratic prior),
//              maintained in covariance form via rank-one updates
//   grid       uniform tensor grid with trapezoidal weights on [-c, c]^d,
//              d <= 3, all mass handled in log domain
//   sparse     mixture over coordinate subsets S with weights
//              pi(S) = 2^{-|S|} / (binom(d,|S|) * sum_s 2^{-s}),
//              each subset carrying its own sub-posterior
// plus a degenerate point mass used for oracle forecasters in tests and
// simulations.
//
// The telescoped regret identity
//   sum_t (L_{t,lambda}(q_t) - loss_t(ref)) =
//       -(1/lambda) log int exp(-lambda sum_t (loss_t - loss_t(ref))) dq_1
// is available both as a replay (replayed_regret) and as the single integral
// (telescoped_regret); the two agree up to numerical error and tests hold
// them to that.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "glmcs/estimators.hpp"
#include "glmcs/glm_family.hpp"
#include "glmcs/observation_log.hpp"

namespace glmcs {

inline double log_sum_exp(const Eigen::VectorXd& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014326779; }

// E[ clamp(Z, -b, b) ] for Z ~ N(mu, sigma^2).
inline double clipped_normal_mean(double mu, double sigma, double b) {
  if (std::isinf(b)) return mu;
  if (!(sigma > 0.0)) return std::clamp(mu, -b, b);
  const double lo = (-b - mu) / sigma;
  const double hi = (b - mu) / sigma;
  const double f_lo = normal_cdf(lo);
  const double f_hi = normal_cdf(hi);
  const double value = -b * f_lo + b * (1.0 - f_hi) + mu * (f_hi - f_lo) -
                       sigma * (normal_pdf(hi) - normal_pdf(lo));
  return std::clamp(value, -b, b);
}

inline Eigen::VectorXd link_loss_vector(const GlmFamily& family, const Eigen::VectorXd& z,
                                        double y) {
  switch (family.kind) {
    case FamilyKind::gaussian:
      return (0.5 * (z.array() - y).square() + 0.5 * kLogTwoPi).matrix();
    case FamilyKind::logistic:
      return (z.array().max(0.0) +
              (-z.array().abs()).unaryExpr([](double v) { return std::log1p(std::exp(v)); }) -
              y * z.array())
          .matrix();
    default: {
      Eigen::VectorXd out(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = link_loss(family, z[i], y);
      return out;
    }
  }
}

inline Eigen::VectorXd project_coordinates(const Eigen::VectorXd& x,
                                           const std::vector<int>& support) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) out[k] = x[support[k]];
  return out;
}

}  // namespace detail

struct QuadraticPrior {
  double gamma = 1.0;  // rho(theta) = ||theta||^2 / (2 gamma^2)
};
struct SparseQuadraticPrior {
  double gamma = 1.0;  // subset mixture, quadratic base density per subset
};
using PriorSpec = std::variant<QuadraticPrior, SparseQuadraticPrior>;

struct ConjugateBranch {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct GridBranch {
  std::shared_ptr<const Eigen::MatrixXd> nodes;  // K^d x d, last dimension fastest
  Eigen::VectorXd log_weights;                   // normalized: log-sum-exp == 0
  double half_width = 0.0;
  int nodes_per_dim = 0;
};

struct PointMassBranch {
  Eigen::VectorXd point;
};

struct SparseComponent;
struct SparseBranch {
  std::vector<SparseComponent> components;
};

struct Posterior {
  GlmFamily family;
  double lambda = 1.0;
  Eigen::Index dim = 0;
  std::variant<ConjugateBranch, GridBranch, PointMassBranch, SparseBranch> branch;
};

struct SparseComponent {
  std::vector<int> support;
  double log_weight = 0.0;
  Posterior sub;  // posterior over the |support|-dimensional subspace
};

// Default tensor-grid resolutions by dimension.
inline int default_grid_nodes(int dim) { return dim <= 1 ? 2001 : dim == 2 ? 201 : 41; }

namespace detail {

inline GridBranch make_grid_branch(Eigen::Index d, double gamma, double half_width,
                                   int nodes_per_dim) {
  if (!(half_width > 0.0))
    throw std::invalid_argument("ewa_init: box_half_width must be positive");
  if (nodes_per_dim < 1) throw std::invalid_argument("ewa_init: nodes_per_dim must be >= 1");
  const int K = nodes_per_dim;
  const double h = K > 1 ? 2.0 * half_width / (K - 1) : 1.0;
  Eigen::Index total = 1;
  for (Eigen::Index j = 0; j < d; ++j) total *= K;
  auto nodes = std::make_shared<Eigen::MatrixXd>(total, d);
  Eigen::VectorXd lw(total);
  const double inv_g2 = 1.0 / (gamma * gamma);
  std::vector<int> idx(d, 0);
  for (Eigen::Index i = 0; i < total; ++i) {
    double log_tau = 0.0;
    double sq = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double coord = K > 1 ? -half_width + idx[j] * h : 0.0;
      (*nodes)(i, j) = coord;
      sq += coord * coord;
      log_tau += (K > 1 && (idx[j] == 0 || idx[j] == K - 1)) ? std::log(0.5 * h)
                                                             : std::log(h);
    }
    lw[i] = log_tau - 0.5 * inv_g2 * sq;
    for (Eigen::Index j = d - 1; j >= 0; --j) {  // odometer, last dimension fastest
      if (++idx[j] < K) break;
      idx[j] = 0;
    }
  }
  lw.array() -= log_sum_exp(lw);
  GridBranch g;
  g.nodes = std::move(nodes);
  g.log_weights = std::move(lw);
  g.half_width = half_width;
  g.nodes_per_dim = K;
  return g;
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

// Grid posterior regardless of family; used for cross-branch consistency
// checks on problems where the conjugate branch is also available.
inline Posterior ewa_init_grid(const GlmFamily& family, Eigen::Index d, double gamma,
                               double lambda, std::optional<double> box_half_width = {},
                               std::optional<int> nodes_per_dim = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ewa_init: lambda must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("ewa_init: gamma must be positive");
  if (d > 3)
    throw std::invalid_argument(
        "ewa_init: grid posterior supports at most 3 dimensions");
  Posterior post;
  post.family = family;
  post.lambda = lambda;
  post.dim = d;
  post.branch = detail::make_grid_branch(d, gamma, box_half_width.value_or(8.0 * gamma),
                                         nodes_per_dim.value_or(default_grid_nodes(int(d))));
  return post;
}

inline Posterior point_mass_posterior(const GlmFamily& family, const Eigen::VectorXd& point,
                                      double lambda = 1.0) {
  Posterior post;
  post.family = family;
  post.lambda = lambda;
  post.dim = point.size();
  post.branch = PointMassBranch{point};
  return post;
}

inline Posterior ewa_init(const GlmFamily& family, Eigen::Index d, const PriorSpec& prior,
                          double lambda, std::optional<double> box_half_width = {},
                          std::optional<int> nodes_per_dim = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ewa_init: lambda must be positive");
  if (d < 1) throw std::invalid_argument("ewa_init: dimension must be positive");

  if (const auto* quad = std::get_if<QuadraticPrior>(&prior)) {
    if (!(quad->gamma > 0.0)) throw std::invalid_argument("ewa_init: gamma must be positive");
    if (family.kind == FamilyKind::gaussian) {
      Posterior post;
      post.family = family;
      post.lambda = lambda;
      post.dim = d;
      post.branch = ConjugateBranch{
          Eigen::VectorXd::Zero(d),
          quad->gamma * quad->gamma * Eigen::MatrixXd::Identity(d, d)};
      return post;
    }
    return ewa_init_grid(family, d, quad->gamma, lambda, box_half_width, nodes_per_dim);
  }

  const auto& sparse = std::get<SparseQuadraticPrior>(prior);
  if (!(sparse.gamma > 0.0)) throw std::invalid_argument("ewa_init: gamma must be positive");
  if (d > 12)
    throw std::invalid_argument(
        "ewa_init: sparse prior enumerates all subsets, d <= 12 required");
  const double log_geom = std::log(2.0 - std::pow(2.0, -double(d)));  // sum_s 2^-s
  SparseBranch branch;
  branch.components.reserve(std::size_t(1) << d);
  for (unsigned long mask = 0; mask < (1ul << d); ++mask) {
    SparseComponent comp;
    for (int j = 0; j < d; ++j)
      if (mask & (1ul << j)) comp.support.push_back(j);
    const int s = int(comp.support.size());
    comp.log_weight = -s * std::log(2.0) - detail::log_binomial(int(d), s) - log_geom;
    if (s == 0) {
      comp.sub = point_mass_posterior(family, Eigen::VectorXd::Zero(0), lambda);
    } else if (family.kind == FamilyKind::gaussian) {
      comp.sub.family = family;
      comp.sub.lambda = lambda;
      comp.sub.dim = s;
      comp.sub.branch = ConjugateBranch{
          Eigen::VectorXd::Zero(s),
          sparse.gamma * sparse.gamma * Eigen::MatrixXd::Identity(s, s)};
    } else {
      if (s > 3)
        throw std::invalid_argument(
            "ewa_init: sparse prior with grid sub-posteriors needs |S| <= 3");
      comp.sub = ewa_init_grid(family, s, sparse.gamma, lambda, box_half_width,
                               nodes_per_dim.has_value() && s == 1
                                   ? nodes_per_dim
                                   : std::optional<int>(default_grid_nodes(s)));
    }
    branch.components.push_back(std::move(comp));
  }
  Posterior post;
  post.family = family;
  post.lambda = lambda;
  post.dim = d;
  post.branch = std::move(branch);
  return post;
}

// Scaled log loss L_{t,lambda}(q) = -(1/lambda) log int exp(-lambda loss) dq.
inline double mix_loss(const Posterior& post, const Eigen::VectorXd& x, double y);

namespace detail {

inline double conjugate_mix_loss(const ConjugateBranch& c, double lambda,
                                 const Eigen::VectorXd& x, double y) {
  const double mu = c.mean.dot(x);
  const double s2 = x.dot(c.cov * x);
  const double denom = 1.0 + lambda * s2;
  return 0.5 * kLogTwoPi + 0.5 * std::log(denom) / lambda +
         0.5 * (y - mu) * (y - mu) / denom;
}

inline void conjugate_absorb(ConjugateBranch& c, double lambda, const Eigen::VectorXd& x,
                             double y) {
  const Eigen::VectorXd cx = c.cov * x;
  const double s2 = x.dot(cx);
  const double gain = lambda / (1.0 + lambda * s2);
  c.mean.noalias() += gain * (y - c.mean.dot(x)) * cx;
  c.cov.noalias() -= gain * (cx * cx.transpose());
  c.cov = 0.5 * (c.cov + c.cov.transpose()).eval();
}

}  // namespace detail

// Applies one EWA tilt in place. The functional ewa_update below is the
// value-semantics wrapper.
inline void ewa_absorb(Posterior& post, const Eigen::VectorXd& x, double y) {
  if (x.size() != post.dim) throw std::invalid_argument("ewa_update: dimension mismatch");
  const double lambda = post.lambda;
  if (auto* conj = std::get_if<ConjugateBranch>(&post.branch)) {
    detail::conjugate_absorb(*conj, lambda, x, y);
  } else if (auto* grid = std::get_if<GridBranch>(&post.branch)) {
    const Eigen::VectorXd z = (*grid->nodes) * x;
    grid->log_weights -= lambda * detail::link_loss_vector(post.family, z, y);
    const double norm = log_sum_exp(grid->log_weights);
    if (!std::isfinite(norm))
      throw std::runtime_error("ewa_update: posterior weights underflowed");
    grid->log_weights.array() -= norm;
  } else if (std::get_if<PointMassBranch>(&post.branch)) {
    // point mass: tilting a single atom renormalizes to itself
  } else {
    auto& sparse = std::get<SparseBranch>(post.branch);
    Eigen::VectorXd lw(sparse.components.size());
    for (std::size_t k = 0; k < sparse.components.size(); ++k) {
      auto& comp = sparse.components[k];
      const Eigen::VectorXd xs = detail::project_coordinates(x, comp.support);
      comp.log_weight += -lambda * mix_loss(comp.sub, xs, y);
      ewa_absorb(comp.sub, xs, y);
      lw[k] = comp.log_weight;
    }
    const double norm = log_sum_exp(lw);
    if (!std::isfinite(norm))
      throw std::runtime_error("ewa_update: mixture weights underflowed");
    for (auto& comp : sparse.components) comp.log_weight -= norm;
  }
}

inline Posterior ewa_update(const Posterior& post, const Eigen::VectorXd& x, double y) {
  Posterior next = post;
  ewa_absorb(next, x, y);
  return next;
}

inline double mix_loss(const Posterior& post, const Eigen::VectorXd& x, double y) {
  if (x.size() != post.dim) throw std::invalid_argument("mix_loss: dimension mismatch");
  const double lambda = post.lambda;
  if (const auto* conj = std::get_if<ConjugateBranch>(&post.branch))
    return detail::conjugate_mix_loss(*conj, lambda, x, y);
  if (const auto* grid = std::get_if<GridBranch>(&post.branch)) {
    const Eigen::VectorXd z = (*grid->nodes) * x;
    return -log_sum_exp(grid->log_weights -
                        lambda * detail::link_loss_vector(post.family, z, y)) /
           lambda;
  }
  if (const auto* pm = std::get_if<PointMassBranch>(&post.branch))
    return link_loss(post.family, pm->point.dot(x), y);
  const auto& sparse = std::get<SparseBranch>(post.branch);
  Eigen::VectorXd terms(sparse.components.size());
  for (std::size_t k = 0; k < sparse.components.size(); ++k) {
    const auto& comp = sparse.components[k];
    terms[k] = comp.log_weight -
               lambda * mix_loss(comp.sub, detail::project_coordinates(x, comp.support), y);
  }
  return -log_sum_exp(terms) / lambda;
}

// mix_loss of the current posterior followed by the tilt, returned together
// to avoid evaluating the sparse mixture twice in simulation loops.
inline double absorb_and_mix_loss(Posterior& post, const Eigen::VectorXd& x, double y) {
  if (auto* sparse = std::get_if<SparseBranch>(&post.branch)) {
    const double lambda = post.lambda;
    Eigen::VectorXd lw(sparse->components.size());
    Eigen::VectorXd terms(sparse->components.size());
    for (std::size_t k = 0; k < sparse->components.size(); ++k) {
      auto& comp = sparse->components[k];
      const Eigen::VectorXd xs = detail::project_coordinates(x, comp.support);
      const double ml = absorb_and_mix_loss(comp.sub, xs, y);
      terms[k] = comp.log_weight - lambda * ml;
      comp.log_weight += -lambda * ml;
      lw[k] = comp.log_weight;
    }
    const double norm = log_sum_exp(lw);
    if (!std::isfinite(norm))
      throw std::runtime_error("ewa_update: mixture weights underflowed");
    for (auto& comp : sparse->components) comp.log_weight -= norm;
    return -log_sum_exp(terms) / lambda;
  }
  const double value = mix_loss(post, x, y);
  ewa_absorb(post, x, y);
  return value;
}

// Plain (unscaled) log loss of the mixture predictive, -log int exp(-loss) dq.
// Coincides with mix_loss when lambda == 1.
inline double log_predictive_loss(const Posterior& post, const Eigen::VectorXd& x, double y) {
  if (const auto* conj = std::get_if<ConjugateBranch>(&post.branch))
    return detail::conjugate_mix_loss(*conj, 1.0, x, y);
  if (const auto* grid = std::get_if<GridBranch>(&post.branch)) {
    const Eigen::VectorXd z = (*grid->nodes) * x;
    return -log_sum_exp(grid->log_weights - detail::link_loss_vector(post.family, z, y));
  }
  if (const auto* pm = std::get_if<PointMassBranch>(&post.branch))
    return link_loss(post.family, pm->point.dot(x), y);
  const auto& sparse = std::get<SparseBranch>(post.branch);
  Eigen::VectorXd terms(sparse.components.size());
  for (std::size_t k = 0; k < sparse.components.size(); ++k) {
    const auto& comp = sparse.components[k];
    terms[k] = comp.log_weight -
               log_predictive_loss(comp.sub, detail::project_coordinates(x, comp.support), y);
  }
  return -log_sum_exp(terms);
}

namespace detail {

// -log int exp(-loss(eta theta + (1-eta) theta_star)) dq, carried in z-space so
// sparse sub-posteriors can reuse the full-dimensional anchor z_star.
inline double shifted_loss_integral(const Posterior& post, const Eigen::VectorXd& x, double y,
                                    double z_star, double eta) {
  if (const auto* conj = std::get_if<ConjugateBranch>(&post.branch)) {
    const double mu = eta * conj->mean.dot(x) + (1.0 - eta) * z_star;
    const double s2 = eta * eta * x.dot(conj->cov * x);
    const double denom = 1.0 + s2;
    return 0.5 * kLogTwoPi + 0.5 * std::log(denom) + 0.5 * (y - mu) * (y - mu) / denom;
  }
  if (const auto* grid = std::get_if<GridBranch>(&post.branch)) {
    const Eigen::VectorXd z =
        (eta * ((*grid->nodes) * x)).array() + (1.0 - eta) * z_star;
    return -log_sum_exp(grid->log_weights - link_loss_vector(post.family, z, y));
  }
  if (const auto* pm = std::get_if<PointMassBranch>(&post.branch))
    return link_loss(post.family, eta * pm->point.dot(x) + (1.0 - eta) * z_star, y);
  const auto& sparse = std::get<SparseBranch>(post.branch);
  Eigen::VectorXd terms(sparse.components.size());
  for (std::size_t k = 0; k < sparse.components.size(); ++k) {
    const auto& comp = sparse.components[k];
    terms[k] = comp.log_weight -
               shifted_loss_integral(comp.sub, project_coordinates(x, comp.support), y,
                                     z_star, eta);
  }
  return -log_sum_exp(terms);
}

}  // namespace detail

inline double shifted_mix_loss(const Posterior& post, const Eigen::VectorXd& x, double y,
                               const Eigen::VectorXd& theta_star, double eta) {
  if (!(eta > 0.0) || !(eta <= 1.0))
    throw std::invalid_argument("shifted_mix_loss: eta must lie in (0, 1]");
  return detail::shifted_loss_integral(post, x, y, theta_star.dot(x), eta);
}

// int clamp(<theta, x>, -b, b) dq(theta).
inline double pseudo_label(const Posterior& post, const Eigen::VectorXd& x, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("pseudo_label: bound must be positive");
  if (const auto* conj = std::get_if<ConjugateBranch>(&post.branch)) {
    const double mu = conj->mean.dot(x);
    const double s2 = x.dot(conj->cov * x);
    return detail::clipped_normal_mean(mu, s2 > 0.0 ? std::sqrt(s2) : 0.0, b);
  }
  if (const auto* grid = std::get_if<GridBranch>(&post.branch)) {
    const Eigen::VectorXd z = (*grid->nodes) * x;
    const double value =
        (grid->log_weights.array().exp() * z.array().min(b).max(-b)).sum();
    return std::clamp(value, -b, b);
  }
  if (const auto* pm = std::get_if<PointMassBranch>(&post.branch))
    return std::clamp(pm->point.dot(x), -b, b);
  const auto& sparse = std::get<SparseBranch>(post.branch);
  double value = 0.0;
  for (const auto& comp : sparse.components)
    value += std::exp(comp.log_weight) *
             pseudo_label(comp.sub, detail::project_coordinates(x, comp.support), b);
  return std::clamp(value, -b, b);
}

inline Eigen::VectorXd posterior_mean(const Posterior& post) {
  if (const auto* conj = std::get_if<ConjugateBranch>(&post.branch)) return conj->mean;
  if (const auto* grid = std::get_if<GridBranch>(&post.branch))
    return grid->nodes->transpose() * grid->log_weights.array().exp().matrix();
  if (const auto* pm = std::get_if<PointMassBranch>(&post.branch)) return pm->point;
  const auto& sparse = std::get<SparseBranch>(post.branch);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(post.dim);
  for (const auto& comp : sparse.components) {
    const Eigen::VectorXd sub_mean = posterior_mean(comp.sub);
    for (std::size_t k = 0; k < comp.support.size(); ++k)
      mean[comp.support[k]] += std::exp(comp.log_weight) * sub_mean[k];
  }
  return mean;
}

namespace detail {

// log int exp(-lambda sum_t loss_t(theta)) dq(theta).
inline double log_loss_integral(const Posterior& post, const ObservationLog& log,
                                double lambda) {
  if (const auto* conj = std::get_if<ConjugateBranch>(&post.branch)) {
    // Gaussian family: sum loss = theta' Gram theta / 2 - theta . w + c0.
    const Eigen::Index d = post.dim;
    const double n = double(log.size());
    const double c0 = 0.5 * log.label_square_sum() + 0.5 * n * kLogTwoPi;
    const Eigen::MatrixXd p0 = conj->cov.llt().solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd a = p0 + lambda * log.gram();
    const Eigen::VectorXd v = p0 * conj->mean + lambda * log.label_covariate_sum();
    const Eigen::LLT<Eigen::MatrixXd> llt_p0(p0);
    const Eigen::LLT<Eigen::MatrixXd> llt_a(a);
    const auto half_log_det = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
      return Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    };
    return -lambda * c0 + half_log_det(llt_p0) - half_log_det(llt_a) +
           0.5 * v.dot(llt_a.solve(v)) - 0.5 * conj->mean.dot(p0 * conj->mean);
  }
  if (const auto* grid = std::get_if<GridBranch>(&post.branch)) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(grid->nodes->rows());
    for (std::size_t t = 0; t < log.size(); ++t) {
      const Eigen::VectorXd z = (*grid->nodes) * log.covariate(t);
      total += link_loss_vector(post.family, z, log.label(t));
    }
    return log_sum_exp(grid->log_weights - lambda * total);
  }
  if (const auto* pm = std::get_if<PointMassBranch>(&post.branch)) {
    double total = 0.0;
    for (std::size_t t = 0; t < log.size(); ++t)
      total += link_loss(post.family, pm->point.dot(log.covariate(t)), log.label(t));
    return -lambda * total;
  }
  const auto& sparse = std::get<SparseBranch>(post.branch);
  Eigen::VectorXd terms(sparse.components.size());
  for (std::size_t k = 0; k < sparse.components.size(); ++k) {
    const auto& comp = sparse.components[k];
    const ObservationLog sub_log =
        comp.support.empty() ? ObservationLog(1) : log.restricted(comp.support);
    if (comp.support.empty()) {
      double total = 0.0;
      for (std::size_t t = 0; t < log.size(); ++t)
        total += link_loss(post.family, 0.0, log.label(t));
      terms[k] = comp.log_weight - lambda * total;
    } else {
      terms[k] = comp.log_weight + log_loss_integral(comp.sub, sub_log, lambda);
    }
  }
  return log_sum_exp(terms);
}

}  // namespace detail

// Single-integral form of the regret of the EWA chain started from `prior`
// against the fixed comparator, per the telescoping identity above.
inline double telescoped_regret(const Posterior& prior, const ObservationLog& log,
                                double lambda, const Eigen::VectorXd& theta_bar) {
  if (!(lambda > 0.0)) throw std::invalid_argument("telescoped_regret: lambda must be positive");
  if (!theta_bar.allFinite())
    throw std::invalid_argument("telescoped_regret: non-finite comparator");
  if (log.size() == 0) return 0.0;
  return -detail::log_loss_integral(prior, log, lambda) / lambda -
         cumulative_loss(log, prior.family, theta_bar);
}

// Per-round accumulation of the same quantity by replaying the chain.
inline double replayed_regret(const Posterior& prior, const ObservationLog& log,
                              double lambda, const Eigen::VectorXd& theta_bar) {
  Posterior post = prior;
  post.lambda = lambda;
  double regret = 0.0;
  for (std::size_t t = 0; t < log.size(); ++t) {
    const Eigen::VectorXd& x = log.covariate(t);
    const double y = log.label(t);
    regret += absorb_and_mix_loss(post, x, y) -
              link_loss(prior.family, theta_bar.dot(x), y);
  }
  return regret;
}

}  // namespace glmcs
