#pragma once
// Append-only covariate/label log with an incrementally maintained Gram
// matrix sum_t x_t x_t^T. Single writer; any number of concurrent readers
// once writes stop.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace glmcs {

class ObservationLog {
 public:
  explicit ObservationLog(Eigen::Index dim)
      : dim_(dim),
        gram_(Eigen::MatrixXd::Zero(dim, dim)),
        label_cov_sum_(Eigen::VectorXd::Zero(dim)) {
    if (dim <= 0) throw std::invalid_argument("ObservationLog: dimension must be positive");
  }

  void append(const Eigen::VectorXd& x, double y) {
    if (x.size() != dim_) throw std::invalid_argument("ObservationLog::append: dimension mismatch");
    if (!x.allFinite() || !std::isfinite(y))
      throw std::invalid_argument("ObservationLog::append: non-finite input");
    xs_.push_back(x);
    ys_.push_back(y);
    gram_.noalias() += x * x.transpose();
    label_cov_sum_.noalias() += y * x;
    label_sq_sum_ += y * y;
    max_norm_ = std::max(max_norm_, x.norm());
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return xs_.size(); }
  bool empty() const { return xs_.empty(); }

  const Eigen::VectorXd& covariate(std::size_t t) const { return xs_.at(t); }
  double label(std::size_t t) const { return ys_.at(t); }

  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& label_covariate_sum() const { return label_cov_sum_; }
  double label_square_sum() const { return label_sq_sum_; }
  double max_covariate_norm() const { return max_norm_; }

  ObservationLog prefix(std::size_t n) const {
    if (n > size()) throw std::invalid_argument("ObservationLog::prefix: n exceeds size");
    ObservationLog out(dim_);
    for (std::size_t t = 0; t < n; ++t) out.append(xs_[t], ys_[t]);
    return out;
  }

  // Projection onto a coordinate subset: covariates become x(S).
  ObservationLog restricted(const std::vector<int>& support) const {
    if (support.empty())
      throw std::invalid_argument("ObservationLog::restricted: empty support");
    for (int j : support)
      if (j < 0 || j >= dim_)
        throw std::invalid_argument("ObservationLog::restricted: index out of range");
    ObservationLog out(static_cast<Eigen::Index>(support.size()));
    Eigen::VectorXd sub(support.size());
    for (std::size_t t = 0; t < size(); ++t) {
      for (std::size_t k = 0; k < support.size(); ++k) sub[k] = xs_[t][support[k]];
      out.append(sub, ys_[t]);
    }
    return out;
  }

 private:
  Eigen::Index dim_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<double> ys_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd label_cov_sum_;
  double label_sq_sum_ = 0.0;
  double max_norm_ = 0.0;
};

}  // namespace glmcs
