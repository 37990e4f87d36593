#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace safectrl {

// Ground-truth disturbance selection for the harness.
struct TruthConfig {
  std::string mode = "rkhs-sample";  // or "closed-form"
  std::string name = "sine";         // closed-form shape, "zero" or "sine"
  int centers = 25;                  // kernel translates in the sampled truth
  double amplitude = 0.3;
  double omega = 3.0;
};

// Full experiment description. Defaults are the reference setup: linear
// plant on [-1, 1], quadratic barrier and Lyapunov function, tight kernel
// prior, and twenty learning rounds.
struct ExperimentConfig {
  std::string preset = "linear-1d";
  double domain_lo = -1.0;
  double domain_hi = 1.0;
  double control_lo = -2.0;
  double control_hi = 2.0;
  double tau = 0.01;

  double signal_variance = 0.0025;
  double lengthscale = 1.75;

  double noise_variance = 4.0;  // shared by the regressor and the simulator
  double sub_gaussian_r = 2.0;
  double delta = 0.1;
  double rkhs_bound_d = 6.8;
  double rkhs_bound_d2 = 1.0;

  double barrier_rate = 1.0;   // K_H
  double lyapunov_rate = 1.0;  // K_V

  int rounds = 20;
  double dt = 0.005;
  double horizon = 8.0;
  std::uint64_t seed = 7;

  int control_candidates = 41;
  double core_level = 0.03;
  int repair_sweeps = 2;
  double policy_lipschitz = 3.0;
  double initial_safe_level = 2.0e-4;  // V sublevel marking the given-safe seed nodes
  double rollout_x0 = 0.5;

  TruthConfig truth;
  std::string measurement_mode = "direct";  // or "finite-difference"
  double fd_dt = 1.0e-3;

  void validate() const;  // throws std::invalid_argument naming the offending field
};

// Builds a config from JSON, starting at the defaults above. Unknown keys
// are rejected by name; type and range violations name the field path.
ExperimentConfig config_from_json(const nlohmann::json& root);

// Reads and parses a JSON config file.
ExperimentConfig load_config(const std::string& path);

}  // namespace safectrl
