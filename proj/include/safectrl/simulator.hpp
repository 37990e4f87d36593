#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "safectrl/certificates.hpp"
#include "safectrl/gp.hpp"
#include "safectrl/kernel.hpp"
#include "safectrl/synthesis.hpp"

namespace safectrl {

// Ground-truth disturbance used by the harness. The learner never sees d or
// d_prime directly, only measurements drawn through measure().
struct TruthModel {
  std::function<double(double)> d;
  std::function<double(double)> d_prime;
  double noise_std = 0.0;
  double sub_gaussian_r = 0.0;  // Gaussian noise with std sigma is R-sub-Gaussian at R = sigma
  std::string construction;
  double rkhs_norm = 0.0;  // 0 when the construction is not a kernel-space sample
};

// Random function with kernel-space norm exactly 0.9 * rkhs_bound: standard
// normal weights on `centers` uniform kernel translates, rescaled in the
// norm induced by the kernel. A zero-norm draw (e.g. zero signal variance)
// degrades to the zero function.
TruthModel sample_rkhs_truth(const Kernel& kernel, double rkhs_bound, int centers,
                             std::uint64_t seed, const DomainInterval& domain,
                             double noise_std);

// "zero" or "sine" (amplitude * sin(omega * x)) with exact derivatives.
TruthModel closed_form_truth(const std::string& name, double amplitude, double omega,
                             double noise_std);

// One measurement pair at (x, u): the disturbance and its half-square, each
// corrupted by independent N(0, noise_std^2) draws from rng.
Measurement measure(const TruthModel& truth, double x, double u, std::mt19937_64& rng);

// Forward-difference variant: integrates the true closed-loop flow from x
// under constant u for fd_dt, then reads the disturbance off the state
// increment. The O(fd_dt) bias is unmodeled by the confidence machinery.
Measurement measure_finite_difference(const TruthModel& truth, const ProblemSpec& spec,
                                      double x, double u, double fd_dt, std::mt19937_64& rng);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> controls;
  std::vector<double> v_values;
  std::vector<double> h_values;  // barrier value h(x) + F(d(x)) along the path
  bool exited = false;           // left the state domain; reported, not thrown
  double exit_time = 0.0;
};

// Classical fourth-order integration of xdot = f(x) + g(x) u + d(x) under
// the interpolated grid policy, which is evaluated at each internal stage.
// Integration stops at the first sample outside the domain.
Trajectory rollout(const TruthModel& truth, const ProblemSpec& spec, const GridPolicy& policy,
                   const Grid& grid, double x0, double dt, double horizon);

}  // namespace safectrl
