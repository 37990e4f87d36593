#include "safectrl/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace safectrl {

void DomainInterval::validate(const char* name) const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) {
    throw std::invalid_argument(std::string(name) + ": interval must be finite with lo <= hi");
  }
}

void ProblemSpec::validate() const {
  if (!f || !g || !h || !dh || !F || !dF || !V || !dV) {
    throw std::invalid_argument("spec: all problem functions must be set");
  }
  if (!(K_H > 0.0) || !(K_V > 0.0)) {
    throw std::invalid_argument("spec: K_H and K_V must be positive");
  }
  domain.validate("spec.domain");
  controls.validate("spec.controls");
  const double cs[] = {constants.B_f,  constants.B_g, constants.B_pi, constants.L_f,
                       constants.L_g,  constants.L_h, constants.L_dh, constants.L_F,
                       constants.L_dF, constants.L_V, constants.L_dV, constants.L_pi};
  for (double v : cs) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("spec: constants must be finite and >= 0");
    }
  }
}

namespace {

ConfidenceInterval iv_add(const ConfidenceInterval& a, const ConfidenceInterval& b) {
  return {a.lower + b.lower, a.upper + b.upper};
}

ConfidenceInterval iv_scale(double s, const ConfidenceInterval& a) {
  return s >= 0.0 ? ConfidenceInterval{s * a.lower, s * a.upper}
                  : ConfidenceInterval{s * a.upper, s * a.lower};
}

ConfidenceInterval iv_mul(const ConfidenceInterval& a, const ConfidenceInterval& b) {
  const double p1 = a.lower * b.lower, p2 = a.lower * b.upper;
  const double p3 = a.upper * b.lower, p4 = a.upper * b.upper;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

}  // namespace

ConfidenceInterval range_on_interval(const std::function<double(double)>& F,
                                     const ConfidenceInterval& iv) {
  // 64 interior points plus both endpoints. For Lipschitz F the range error
  // is at most L_F * width / 65, absorbed by the certificate margins.
  constexpr int kSamples = 66;
  double lo = F(iv.lower), hi = lo;
  for (int i = 1; i < kSamples; ++i) {
    const double t = static_cast<double>(i) / (kSamples - 1);
    const double v = F(iv.lower + t * (iv.upper - iv.lower));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

ConfidenceInterval hdot_bounds(const ProblemSpec& spec, const GpPosterior& post,
                               const ConfidenceConfig& cfg, double x, double u) {
  const double drive = spec.f(x) + spec.g(x) * u;  // known part of the velocity
  const double hx = spec.h(x);
  const double dhx = spec.dh(x);

  const ConfidenceInterval id = interval_d(post, cfg, x);
  const ConfidenceInterval idd = interval_dd(post, cfg, x);
  const ConfidenceInterval iddd = interval_ddd(post, cfg, x);
  const ConfidenceInterval rF = range_on_interval(spec.F, id);
  const ConfidenceInterval rdF = range_on_interval(spec.dF, id);

  // Hdot = h'(f+gu) + h' d + F'(d) d' (f+gu) + F'(d) (d d') + K_H h + K_H F(d),
  // each unknown factor replaced by its confidence interval. The d d' factor
  // gets the dedicated product interval, which is far tighter than the
  // product of the d and d' intervals.
  ConfidenceInterval total{dhx * drive + spec.K_H * hx, dhx * drive + spec.K_H * hx};
  total = iv_add(total, iv_scale(dhx, id));
  total = iv_add(total, iv_scale(drive, iv_mul(rdF, idd)));
  total = iv_add(total, iv_mul(rdF, iddd));
  total = iv_add(total, iv_scale(spec.K_H, rF));
  return total;
}

ConfidenceInterval vdot_bounds(const ProblemSpec& spec, const GpPosterior& post,
                               const ConfidenceConfig& cfg, double x, double u) {
  const double dvx = spec.dV(x);
  const PosteriorStats d = post.query_d(x);
  const double mean = dvx * (spec.f(x) + d.mean + spec.g(x) * u) + spec.K_V * spec.V(x);
  const double gamma = info_gain(post, cfg.noise_variance);
  const double radius = beta_sqrt(cfg, cfg.rkhs_bound_d, gamma) * std::abs(dvx) * d.std;
  return {mean - radius, mean + radius};
}

CertBounds cert_bounds(const ProblemSpec& spec, const GpPosterior& post,
                       const ConfidenceConfig& cfg, double x, double u) {
  const ConfidenceInterval hd = hdot_bounds(spec, post, cfg, x, u);
  const ConfidenceInterval vd = vdot_bounds(spec, post, cfg, x, u);
  return {hd.lower, hd.upper, vd.lower, vd.upper};
}

LipschitzConstants lipschitz_constants(const ProblemSpec& spec, const Kernel& kernel,
                                       const ConfidenceConfig& cfg) {
  const ProblemConstants& c = spec.constants;
  const KernelSupNorms sup = kernel.sup_norms();
  const RkhsEnvelope env = kernel.rkhs_envelope();
  const double B_d = cfg.rkhs_bound_d;

  const double L_d = B_d * env.deriv;         // Lipschitz constant of d, = sup|d'|
  const double L_dd = B_d * env.second_deriv; // Lipschitz constant of d'
  // Both the feature-map envelope and the raw kernel sup norm appear as the
  // bound on sup|d| in circulating assemblies; take whichever is larger.
  const double sup_d = B_d * std::max(env.value, sup.k);

  // Speed bound of the closed loop and the two factors of the product rule.
  const double speed = c.B_f + c.B_g * c.B_pi + sup_d;
  const double dH_slope = c.L_dh + c.L_dF * L_d * L_d + c.L_F * L_dd;  // of h' + F'(d) d'
  const double speed_slope = c.L_f + L_d + c.B_g * c.L_pi + c.L_g * c.B_pi;
  const double dH_bound = c.L_h + c.L_F * L_d;  // sup of |h' + F'(d) d'| growth factor

  const double hdot_expanded =
      speed * dH_slope + dH_bound * speed_slope + std::abs(spec.K_H) * dH_bound;
  // Printed grouping of the same constant; kept and maxed against the
  // expansion so the result upper-bounds both readings.
  const double hdot_printed =
      (c.B_f + c.B_g * c.B_pi + B_d * sup.k) * dH_slope +
      (c.L_h + c.L_F * B_d * sup.dk) *
          (c.L_f + L_d * c.B_g * c.L_pi + std::abs(spec.K_H) * (c.L_g + c.L_F * L_d));

  const double vdot_expanded = speed * c.L_dV + (speed_slope + spec.K_V) * c.L_V;
  const double vdot_printed = (c.B_f + c.B_g * c.B_pi + B_d * sup.k) * c.L_dV +
                              (c.L_f + L_d + c.B_g * c.L_pi + spec.K_V) * c.L_V;

  LipschitzConstants out;
  out.d = L_d;
  out.dd = L_dd;
  out.hdot = std::max(hdot_expanded, hdot_printed);
  out.vdot = std::max(vdot_expanded, vdot_printed);
  return out;
}

bool in_certified_set(const ProblemSpec& spec, const GpPosterior& post,
                      const ConfidenceConfig& cfg, const LipschitzConstants& lip,
                      double x, double u, double tau) {
  const CertBounds b = cert_bounds(spec, post, cfg, x, u);
  return b.u_vdot <= -lip.vdot * tau && b.l_hdot >= lip.hdot * tau;
}

bool in_safe_level_set(const ProblemSpec& spec, const GpPosterior& post,
                       const ConfidenceConfig& cfg, double x) {
  const ConfidenceInterval id = interval_d(post, cfg, x);
  return spec.h(x) + range_on_interval(spec.F, id).lower >= 0.0;
}

}  // namespace safectrl
