#pragma once
// Generalized linear model families and per-round losses.
//
// Labels follow the exponential-family density
//   p(y | x, theta) = exp(<theta,x> y - psi(<theta,x>)) h(y),
// so the per-round loss is the full negative log likelihood
//   loss(theta) = -<theta,x> y + psi(<theta,x>) - log h(y).
// The -log h(y) term is kept so that exp(-loss) is an exact density;
// set membership only ever uses loss differences, where it cancels.
//
// Built-in families:
//   gaussian: psi(z) = z^2/2, unit-variance normal labels
//   logistic: psi(z) = log(1+e^z), Bernoulli labels
// Poisson (psi = e^z) is deliberately not built in: it has no global
// smoothness bound, which the width formulas require. New families can be
// added by filling in a GlmFamily value with the same invariants.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "glmcs/philox_rng.hpp"

namespace glmcs {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

enum class FamilyKind { gaussian, logistic, custom };

struct GlmFamily {
  std::string name;
  FamilyKind kind = FamilyKind::custom;
  std::function<double(double)> log_partition;           // psi
  std::function<double(double)> mean;                    // psi'
  std::function<double(double)> variance;                // psi''
  double smoothness = 0.0;                               // global bound on psi''
  std::function<double(double)> strong_convexity_at;     // b -> inf_{|z|<=b} psi''
  std::function<double(double)> log_carrier;             // y -> log h(y)
  std::function<bool(double)> in_support;
  std::function<double(double, CounterRng&)> sample;     // label draw at natural parameter z

  static const GlmFamily& gaussian();
  static const GlmFamily& logistic();
  static const GlmFamily& by_name(std::string_view name);
};

namespace detail {

// log(1 + e^z) without overflow for large |z|.
inline double log1pexp(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

inline const GlmFamily& GlmFamily::gaussian() {
  static const GlmFamily family = [] {
    GlmFamily f;
    f.name = "gaussian";
    f.kind = FamilyKind::gaussian;
    f.log_partition = [](double z) { return 0.5 * z * z; };
    f.mean = [](double z) { return z; };
    f.variance = [](double) { return 1.0; };
    f.smoothness = 1.0;
    f.strong_convexity_at = [](double) { return 1.0; };
    f.log_carrier = [](double y) { return -0.5 * y * y - 0.5 * kLogTwoPi; };
    f.in_support = [](double y) { return std::isfinite(y); };
    f.sample = [](double z, CounterRng& rng) { return z + rng.next_normal(); };
    return f;
  }();
  return family;
}

inline const GlmFamily& GlmFamily::logistic() {
  static const GlmFamily family = [] {
    GlmFamily f;
    f.name = "logistic";
    f.kind = FamilyKind::logistic;
    f.log_partition = [](double z) { return detail::log1pexp(z); };
    f.mean = [](double z) { return detail::sigmoid(z); };
    f.variance = [](double z) {
      const double m = detail::sigmoid(z);
      return m * (1.0 - m);
    };
    f.smoothness = 0.25;
    // psi'' is symmetric and decreasing in |z|, so the infimum over
    // [-b, b] sits at the endpoints.
    f.strong_convexity_at = [](double b) {
      const double m = detail::sigmoid(std::abs(b));
      return m * (1.0 - m);
    };
    f.log_carrier = [](double) { return 0.0; };
    f.in_support = [](double y) { return y == 0.0 || y == 1.0; };
    f.sample = [](double z, CounterRng& rng) {
      return rng.next_bernoulli(detail::sigmoid(z)) ? 1.0 : 0.0;
    };
    return f;
  }();
  return family;
}

inline const GlmFamily& GlmFamily::by_name(std::string_view name) {
  if (name == "gaussian") return gaussian();
  if (name == "logistic") return logistic();
  throw std::invalid_argument("GlmFamily::by_name: unknown family '" +
                              std::string(name) + "'");
}

// Loss as a function of the natural parameter z = <theta, x>.
inline double link_loss(const GlmFamily& family, double z, double y) {
  return -z * y + family.log_partition(z) - family.log_carrier(y);
}

inline double neg_log_likelihood(const GlmFamily& family, const Eigen::VectorXd& x,
                                 double y, const Eigen::VectorXd& theta) {
  if (!x.allFinite() || !theta.allFinite() || !std::isfinite(y))
    throw std::invalid_argument("neg_log_likelihood: non-finite input");
  if (x.size() != theta.size())
    throw std::invalid_argument("neg_log_likelihood: dimension mismatch");
  if (!family.in_support(y))
    throw std::domain_error("neg_log_likelihood: label outside the support of " +
                            family.name);
  return link_loss(family, theta.dot(x), y);
}

// Symmetrized midpoint divergence of the log-partition function:
//   d(z, z') = psi(z)/2 + psi(z')/2 - psi((z + z')/2).
// Nonnegative by convexity; (z - z')^2 / 8 exactly for the gaussian family.
inline double midpoint_divergence(const GlmFamily& family, double z, double z_prime) {
  if (!std::isfinite(z) || !std::isfinite(z_prime))
    throw std::invalid_argument("midpoint_divergence: non-finite input");
  const double v = 0.5 * family.log_partition(z) + 0.5 * family.log_partition(z_prime) -
                   family.log_partition(0.5 * (z + z_prime));
  return std::max(v, 0.0);
}

// Loss evaluated at the convex combination eta*theta + (1-eta)*theta_star.
inline double shifted_loss(const GlmFamily& family, const Eigen::VectorXd& x, double y,
                           const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_star,
                           double eta) {
  if (!(eta > 0.0) || !(eta <= 1.0))
    throw std::invalid_argument("shifted_loss: eta must lie in (0, 1]");
  if (theta.size() != theta_star.size())
    throw std::invalid_argument("shifted_loss: dimension mismatch");
  return neg_log_likelihood(family, x, y,
                            (eta * theta + (1.0 - eta) * theta_star).eval());
}

// Clamp of z to [-b, b]; identity inside the interval.
inline double truncate(double z, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("truncate: bound must be positive");
  return std::clamp(z, -b, b);
}

inline double sample_label(const GlmFamily& family, double z, CounterRng& rng) {
  if (!std::isfinite(z)) throw std::invalid_argument("sample_label: non-finite z");
  return family.sample(z, rng);
}

}  // namespace glmcs
