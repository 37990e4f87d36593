#pragma once

#include <vector>

#include <Eigen/Dense>

#include "safectrl/kernel.hpp"

namespace safectrl {

// One noisy observation of the unknown additive term at state x under
// control u: d_hat estimates d(x), d2_hat estimates d(x)^2 / 2. Both carry
// independent noise of the same variance.
struct Measurement {
  double x = 0.0;
  double u = 0.0;
  double d_hat = 0.0;
  double d2_hat = 0.0;
};

// Posterior mean and standard deviation at a query point.
struct PosteriorStats {
  double mean = 0.0;
  double std = 0.0;
};

// Immutable GP posterior over the unknown term d and, through a second
// regression head on the d2_hat targets, over d^2/2. Both heads share the
// Gram matrix and its Cholesky factor; adding a measurement returns a new
// posterior and refactorizes from scratch.
class GpPosterior {
 public:
  GpPosterior(Kernel kernel, double noise_variance);

  // Value-semantics update. Throws std::runtime_error if the factorization
  // of K + sigma^2 I loses positive definiteness (conditioning is reported,
  // never silently patched).
  GpPosterior add_measurement(const Measurement& m) const;

  PosteriorStats query_d(double x) const;    // d(x)
  PosteriorStats query_dd(double x) const;   // d'(x)
  PosteriorStats query_d2(double x) const;   // d(x)^2 / 2
  PosteriorStats query_ddd(double x) const;  // d(x) d'(x), the derivative of d^2/2

  int size() const { return static_cast<int>(data_.size()); }
  const Kernel& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  const std::vector<Measurement>& data() const { return data_; }

  // Lower Cholesky factor L with L L^T = K + sigma^2 I. Empty when size()==0.
  const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }

 private:
  Kernel kernel_;
  double noise_variance_;
  std::vector<Measurement> data_;

  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd weights_d_;   // (K + sigma^2 I)^{-1} y
  Eigen::VectorXd weights_d2_;  // (K + sigma^2 I)^{-1} y2

  void refactor();
  Eigen::VectorXd kvec(double x) const;   // [k(x_i, x)]_i
  Eigen::VectorXd dkvec(double x) const;  // [d/dx k(x_i, x)]_i, derivative in the query point
  PosteriorStats value_query(double x, const Eigen::VectorXd& w) const;
  PosteriorStats deriv_query(double x, const Eigen::VectorXd& w) const;
};

}  // namespace safectrl
