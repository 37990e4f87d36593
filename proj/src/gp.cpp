#include "safectrl/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace safectrl {

GpPosterior::GpPosterior(Kernel kernel, double noise_variance)
    : kernel_(kernel), noise_variance_(noise_variance) {
  if (!std::isfinite(noise_variance) || noise_variance <= 0.0) {
    throw std::invalid_argument("gp: noise_variance must be finite and positive");
  }
}

GpPosterior GpPosterior::add_measurement(const Measurement& m) const {
  if (!std::isfinite(m.x) || !std::isfinite(m.d_hat) || !std::isfinite(m.d2_hat)) {
    throw std::invalid_argument("gp: measurement must be finite");
  }
  GpPosterior next = *this;
  next.data_.push_back(m);
  next.refactor();
  return next;
}

void GpPosterior::refactor() {
  const int n = size();
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double kij = kernel_.eval(data_[i].x, data_[j].x);
      gram(i, j) = kij;
      gram(j, i) = kij;
    }
    gram(i, i) += noise_variance_;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gp: Cholesky of K + sigma^2 I failed, matrix not positive definite");
  }
  chol_lower_ = llt.matrixL();

  Eigen::VectorXd y(n), y2(n);
  for (int i = 0; i < n; ++i) {
    y(i) = data_[i].d_hat;
    y2(i) = data_[i].d2_hat;
  }
  weights_d_ = llt.solve(y);
  weights_d2_ = llt.solve(y2);
}

Eigen::VectorXd GpPosterior::kvec(double x) const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v(i) = kernel_.eval(data_[i].x, x);
  return v;
}

Eigen::VectorXd GpPosterior::dkvec(double x) const {
  // The derivative is taken in the query point. By symmetry of the kernel,
  // d/dx k(x_i, x) = eval_dx(x, x_i).
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v(i) = kernel_.eval_dx(x, data_[i].x);
  return v;
}

PosteriorStats GpPosterior::value_query(double x, const Eigen::VectorXd& w) const {
  const double prior_var = kernel_.eval(x, x);
  if (size() == 0) {
    return {0.0, std::sqrt(prior_var)};
  }
  const Eigen::VectorXd kx = kvec(x);
  const Eigen::VectorXd half = chol_lower_.triangularView<Eigen::Lower>().solve(kx);
  double var = prior_var - half.squaredNorm();
  if (var < 0.0) var = 0.0;
  return {kx.dot(w), std::sqrt(var)};
}

PosteriorStats GpPosterior::deriv_query(double x, const Eigen::VectorXd& w) const {
  const double prior_var = kernel_.eval_dxdx(x, x);
  if (size() == 0) {
    return {0.0, std::sqrt(prior_var)};
  }
  const Eigen::VectorXd dkx = dkvec(x);
  const Eigen::VectorXd half = chol_lower_.triangularView<Eigen::Lower>().solve(dkx);
  double var = prior_var - half.squaredNorm();
  if (var < 0.0) var = 0.0;
  return {dkx.dot(w), std::sqrt(var)};
}

PosteriorStats GpPosterior::query_d(double x) const { return value_query(x, weights_d_); }
PosteriorStats GpPosterior::query_dd(double x) const { return deriv_query(x, weights_d_); }
PosteriorStats GpPosterior::query_d2(double x) const { return value_query(x, weights_d2_); }
PosteriorStats GpPosterior::query_ddd(double x) const { return deriv_query(x, weights_d2_); }

}  // namespace safectrl
