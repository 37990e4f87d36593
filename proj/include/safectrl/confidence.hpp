#pragma once

#include "safectrl/gp.hpp"

namespace safectrl {

// Constants behind the high-probability confidence sets. The failure budget
// delta is split evenly across the three function channels (value,
// derivative, product), so each channel runs at delta / 3.
struct ConfidenceConfig {
  double delta = 0.1;           // total failure probability, in (0, 1)
  double rkhs_bound_d = 1.0;    // norm bound on d
  double rkhs_bound_d2 = 1.0;   // norm bound on d^2 / 2
  double sub_gaussian_r = 1.0;  // noise proxy scale R
  double noise_variance = 1.0;  // sigma^2 used by the regressor

  // Regularization weight 1 / sigma^2; derived, never stored.
  double alpha() const { return 1.0 / noise_variance; }

  void validate() const;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

// Information gain of the current data set,
// (1/2) log det(I + sigma^{-2} K_n), computed from the cached Cholesky
// factor of K_n + sigma^2 I.
double info_gain(const GpPosterior& post, double noise_variance);

// Radius multiplier sqrt(beta) = B + (R / sigma^2) sqrt(2 (gamma + 1 + ln(1/delta_eff))).
double beta_sqrt(const ConfidenceConfig& cfg, double rkhs_bound, double gamma);

// Per-channel confidence intervals: mean +- sqrt(beta) * std. The value and
// derivative channels share the norm bound on d; the product channel (for
// d d' as the derivative of d^2/2) uses the bound on d^2 / 2. All three use
// the same information gain, because the heads share one Gram matrix.
ConfidenceInterval interval_d(const GpPosterior& post, const ConfidenceConfig& cfg, double x);
ConfidenceInterval interval_dd(const GpPosterior& post, const ConfidenceConfig& cfg, double x);
ConfidenceInterval interval_ddd(const GpPosterior& post, const ConfidenceConfig& cfg, double x);

}  // namespace safectrl
