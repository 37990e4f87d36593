#include "safectrl/confidence.hpp"

#include <cmath>
#include <stdexcept>

namespace safectrl {

void ConfidenceConfig::validate() const {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("confidence: delta must lie in (0, 1)");
  }
  if (!(rkhs_bound_d > 0.0) || !std::isfinite(rkhs_bound_d)) {
    throw std::invalid_argument("confidence: rkhs_bound_d must be finite and positive");
  }
  if (!(rkhs_bound_d2 > 0.0) || !std::isfinite(rkhs_bound_d2)) {
    throw std::invalid_argument("confidence: rkhs_bound_d2 must be finite and positive");
  }
  if (!(sub_gaussian_r > 0.0) || !std::isfinite(sub_gaussian_r)) {
    throw std::invalid_argument("confidence: sub_gaussian_r must be finite and positive");
  }
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("confidence: noise_variance must be finite and positive");
  }
}

double info_gain(const GpPosterior& post, double noise_variance) {
  // log det(I + sigma^{-2} K) = log det(K + sigma^2 I) - n log sigma^2, and
  // the first determinant is twice the sum of the log of the Cholesky
  // diagonal of K + sigma^2 I.
  const int n = post.size();
  if (n == 0) return 0.0;
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(post.chol_lower()(i, i));
  return log_det - 0.5 * n * std::log(noise_variance);
}

double beta_sqrt(const ConfidenceConfig& cfg, double rkhs_bound, double gamma) {
  const double delta_eff = cfg.delta / 3.0;
  return rkhs_bound +
         cfg.sub_gaussian_r * cfg.alpha() *
             std::sqrt(2.0 * (gamma + 1.0 + std::log(1.0 / delta_eff)));
}

namespace {

ConfidenceInterval around(const PosteriorStats& s, double radius_mult) {
  return {s.mean - radius_mult * s.std, s.mean + radius_mult * s.std};
}

}  // namespace

ConfidenceInterval interval_d(const GpPosterior& post, const ConfidenceConfig& cfg, double x) {
  const double gamma = info_gain(post, cfg.noise_variance);
  return around(post.query_d(x), beta_sqrt(cfg, cfg.rkhs_bound_d, gamma));
}

ConfidenceInterval interval_dd(const GpPosterior& post, const ConfidenceConfig& cfg, double x) {
  const double gamma = info_gain(post, cfg.noise_variance);
  return around(post.query_dd(x), beta_sqrt(cfg, cfg.rkhs_bound_d, gamma));
}

ConfidenceInterval interval_ddd(const GpPosterior& post, const ConfidenceConfig& cfg, double x) {
  const double gamma = info_gain(post, cfg.noise_variance);
  return around(post.query_ddd(x), beta_sqrt(cfg, cfg.rkhs_bound_d2, gamma));
}

}  // namespace safectrl
