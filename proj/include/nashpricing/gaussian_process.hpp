#pragma once

#include <Eigen/Dense>

#include <vector>

#include "nashpricing/random.hpp"

namespace nashpricing {

struct GpOptions {
  std::vector<double> lengthscales = {0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.2, 2.0};
  std::vector<double> signal_variances = {0.25, 1.0, 4.0};
  double jitter = 1e-6;
  double max_jitter = 1e-2;
  int rff_features = 128;
};

// Zero-mean GP on standardized targets (so a constant mean in the original
// units) with a squared-exponential kernel. Hyperparameters are picked from
// the option grid by log marginal likelihood.
class GaussianProcess {
 public:
  // Rows of `points` are observations. Needs at least two rows. Throws
  // std::runtime_error when the kernel stays singular at max_jitter.
  static GaussianProcess fit(const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& values,
                             const GpOptions& options = {});

  double lengthscale() const { return lengthscale_; }
  double signal_variance() const { return signal_variance_; }
  double noise() const { return noise_; }
  double log_marginal_likelihood() const { return lml_; }

  // Queries are rows; results in the original units.
  Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& queries) const;
  Eigen::VectorXd posterior_variance(const Eigen::MatrixXd& queries) const;

  // One joint posterior draw at every query row (pathwise conditioning of a
  // random-feature prior draw).
  Eigen::VectorXd sample(const Eigen::MatrixXd& queries, Rng& rng) const;

 private:
  Eigen::MatrixXd kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

  Eigen::MatrixXd points_;
  Eigen::VectorXd targets_;  // standardized
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double lengthscale_ = 1.0;
  double signal_variance_ = 1.0;
  double noise_ = 1e-6;
  double lml_ = 0.0;
  int rff_features_ = 512;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

}  // namespace nashpricing
