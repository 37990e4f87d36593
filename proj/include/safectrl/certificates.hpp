#pragma once

#include <functional>

#include "safectrl/confidence.hpp"
#include "safectrl/gp.hpp"
#include "safectrl/kernel.hpp"

namespace safectrl {

struct DomainInterval {
  double lo = -1.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  void validate(const char* name) const;
};

// Bound and Lipschitz constants of the known problem data, all valid over
// the state domain (B_pi and L_pi describe the admissible policies).
struct ProblemConstants {
  double B_f = 0.0;
  double B_g = 0.0;
  double B_pi = 0.0;
  double L_f = 0.0;
  double L_g = 0.0;
  double L_h = 0.0;
  double L_dh = 0.0;
  double L_F = 0.0;
  double L_dF = 0.0;
  double L_V = 0.0;
  double L_dV = 0.0;
  double L_pi = 0.0;
};

// The known parts of the control problem: dynamics x' = f(x) + g(x)u + d(x)
// with d unknown, barrier h(x) + F(d(x)) >= 0 whose shape F of the unknown
// term is known, and a Lyapunov candidate V. dh, dF, dV are the exact
// derivatives of h, F, V.
struct ProblemSpec {
  std::function<double(double)> f;
  std::function<double(double)> g;
  std::function<double(double)> h;
  std::function<double(double)> dh;
  std::function<double(double)> F;
  std::function<double(double)> dF;
  std::function<double(double)> V;
  std::function<double(double)> dV;
  double K_H = 1.0;  // barrier decay rate, > 0
  double K_V = 1.0;  // Lyapunov decay rate, > 0
  ProblemConstants constants;
  DomainInterval domain;
  DomainInterval controls;

  void validate() const;
};

// High-probability brackets of the certificate quantities
// Hdot = (h' + F'(d) d')(f + d + g u) + K_H (h + F(d)) and
// Vdot = V'(f + d + g u) + K_V V at a fixed (x, u).
struct CertBounds {
  double l_hdot = 0.0;
  double u_hdot = 0.0;
  double l_vdot = 0.0;
  double u_vdot = 0.0;
};

struct LipschitzConstants {
  double hdot = 0.0;
  double vdot = 0.0;
  double d = 0.0;
  double dd = 0.0;
};

// Range of a scalar function over an interval, estimated by evaluating at
// both endpoints plus 64 interior points. Exact for zero-width intervals
// and for monotone F at the resolution of the sampling.
ConfidenceInterval range_on_interval(const std::function<double(double)>& F,
                                     const ConfidenceInterval& iv);

// Interval bracket of Hdot(x, u) by worst-case interval arithmetic over the
// confidence intervals of d, d', and d d'. The d d' cross term uses its own
// separately regressed interval, never the product of the d and d' intervals.
ConfidenceInterval hdot_bounds(const ProblemSpec& spec, const GpPosterior& post,
                               const ConfidenceConfig& cfg, double x, double u);

// Bracket of Vdot(x, u): mean V'(x)(f + mu_d + g u) + K_V V(x), radius
// sqrt(beta_d) |V'(x)| sigma_d(x).
ConfidenceInterval vdot_bounds(const ProblemSpec& spec, const GpPosterior& post,
                               const ConfidenceConfig& cfg, double x, double u);

CertBounds cert_bounds(const ProblemSpec& spec, const GpPosterior& post,
                       const ConfidenceConfig& cfg, double x, double u);

// Lipschitz constants of Hdot and Vdot along the closed loop (policy taken
// from the L_pi class), of d, and of d'. Two assemblies of the closed-loop
// constants exist in circulation that group the kernel factors differently;
// the larger of the two is returned so the sampled bound stays valid.
LipschitzConstants lipschitz_constants(const ProblemSpec& spec, const Kernel& kernel,
                                       const ConfidenceConfig& cfg);

// Discretized certificate at a grid node: Vdot upper bound clears -L_vdot*tau
// and Hdot lower bound clears +L_hdot*tau, which by Lipschitz continuity
// extends both continuous conditions to the node's tau/2 neighborhood.
bool in_certified_set(const ProblemSpec& spec, const GpPosterior& post,
                      const ConfidenceConfig& cfg, const LipschitzConstants& lip,
                      double x, double u, double tau);

// Pessimistic barrier level set: h(x) + min F over the confidence interval
// of d(x) is nonnegative. Inner approximation of the true safe level set.
bool in_safe_level_set(const ProblemSpec& spec, const GpPosterior& post,
                       const ConfidenceConfig& cfg, double x);

}  // namespace safectrl
