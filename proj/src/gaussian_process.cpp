#include "nashpricing/gaussian_process.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nashpricing {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * a * b.transpose();
  d.colwise() += an;
  d.rowwise() += bn.transpose();
  return d.cwiseMax(0.0);
}

bool factorize(const Eigen::MatrixXd& k, double noise,
               Eigen::LLT<Eigen::MatrixXd>& chol) {
  Eigen::MatrixXd kn = k;
  kn.diagonal().array() += noise;
  chol.compute(kn);
  if (chol.info() != Eigen::Success) return false;
  const Eigen::VectorXd diag = chol.matrixLLT().diagonal();
  return diag.allFinite() && diag.minCoeff() > 0.0;
}

}  // namespace

Eigen::MatrixXd GaussianProcess::kernel(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b) const {
  const double inv = 1.0 / (2.0 * lengthscale_ * lengthscale_);
  return signal_variance_ * (-inv * squared_distances(a, b)).array().exp().matrix();
}

GaussianProcess GaussianProcess::fit(const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& values,
                                     const GpOptions& options) {
  if (points.rows() < 2)
    throw std::invalid_argument("GP fit needs at least two observations");
  if (points.rows() != values.size())
    throw std::invalid_argument("GP fit: point/value count mismatch");
  if (!values.allFinite())
    throw std::invalid_argument("GP fit: non-finite observation");

  GaussianProcess gp;
  gp.points_ = points;
  gp.rff_features_ = options.rff_features;
  gp.y_mean_ = values.mean();
  const double var =
      (values.array() - gp.y_mean_).square().sum() / static_cast<double>(values.size());
  gp.y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  gp.targets_ = (values.array() - gp.y_mean_) / gp.y_scale_;

  const Eigen::MatrixXd d2 = squared_distances(points, points);
  const double n = static_cast<double>(points.rows());
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double noise = options.jitter; noise <= options.max_jitter * (1 + 1e-9);
       noise *= 10.0) {
    for (double ell : options.lengthscales) {
      for (double sv : options.signal_variances) {
        const Eigen::MatrixXd k =
            sv * (-d2 / (2.0 * ell * ell)).array().exp().matrix();
        Eigen::LLT<Eigen::MatrixXd> chol;
        if (!factorize(k, noise, chol)) continue;
        const Eigen::VectorXd alpha = chol.solve(gp.targets_);
        const double logdet =
            2.0 * chol.matrixLLT().diagonal().array().log().sum();
        const double lml = -0.5 * gp.targets_.dot(alpha) - 0.5 * logdet -
                           0.5 * n * std::log(2.0 * std::numbers::pi);
        if (std::isfinite(lml) && lml > best) {
          best = lml;
          found = true;
          gp.lengthscale_ = ell;
          gp.signal_variance_ = sv;
          gp.noise_ = noise;
        }
      }
    }
    if (found) break;
  }
  if (!found)
    throw std::runtime_error("GP fit: kernel matrix singular up to jitter " +
                             std::to_string(options.max_jitter));

  gp.lml_ = best;
  factorize(gp.kernel(points, points), gp.noise_, gp.chol_);
  gp.alpha_ = gp.chol_.solve(gp.targets_);
  return gp;
}

Eigen::VectorXd GaussianProcess::posterior_mean(
    const Eigen::MatrixXd& queries) const {
  const Eigen::VectorXd m = kernel(queries, points_) * alpha_;
  return (m.array() * y_scale_ + y_mean_).matrix();
}

Eigen::VectorXd GaussianProcess::posterior_variance(
    const Eigen::MatrixXd& queries) const {
  const Eigen::MatrixXd ks = kernel(points_, queries);
  const Eigen::MatrixXd v = chol_.matrixL().solve(ks);
  Eigen::VectorXd var =
      (signal_variance_ - v.colwise().squaredNorm().array()).cwiseMax(0.0);
  return var * (y_scale_ * y_scale_);
}

Eigen::VectorXd GaussianProcess::sample(const Eigen::MatrixXd& queries,
                                        Rng& rng) const {
  const Eigen::Index dim = points_.cols();
  const int m = rff_features_;
  Eigen::MatrixXd omega(m, dim);
  Eigen::VectorXd phase(m), weight(m);
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) omega(i, j) = rng.normal() / lengthscale_;
    phase(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    weight(i) = rng.normal();
  }
  const double amp = std::sqrt(2.0 * signal_variance_ / m);
  auto prior = [&](const Eigen::MatrixXd& x) -> Eigen::VectorXd {
    Eigen::MatrixXd z = x * omega.transpose();
    z.rowwise() += phase.transpose();
    return amp * (z.array().cos().matrix() * weight);
  };

  Eigen::VectorXd residual = targets_ - prior(points_);
  const double noise_sd = std::sqrt(noise_);
  for (Eigen::Index i = 0; i < residual.size(); ++i)
    residual(i) -= noise_sd * rng.normal();
  const Eigen::VectorXd f =
      prior(queries) + kernel(queries, points_) * chol_.solve(residual);
  return (f.array() * y_scale_ + y_mean_).matrix();
}

}  // namespace nashpricing
