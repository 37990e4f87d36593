#include "safectrl/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace safectrl {

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

double as_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) fail(path + " must be a number");
  return v.get<double>();
}

int as_int(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path + " must be an integer");
  return v.get<int>();
}

std::uint64_t as_seed(const nlohmann::json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return static_cast<std::uint64_t>(v.get<long long>());
  fail(path + " must be a nonnegative integer");
}

std::string as_string(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) fail(path + " must be a string");
  return v.get<std::string>();
}

void parse_truth(const nlohmann::json& node, TruthConfig& truth) {
  if (!node.is_object()) fail("truth must be an object");
  for (const auto& [key, value] : node.items()) {
    const std::string path = "truth." + key;
    if (key == "mode")
      truth.mode = as_string(value, path);
    else if (key == "name")
      truth.name = as_string(value, path);
    else if (key == "centers")
      truth.centers = as_int(value, path);
    else if (key == "amplitude")
      truth.amplitude = as_number(value, path);
    else if (key == "omega")
      truth.omega = as_number(value, path);
    else
      fail("unknown key '" + path + "'");
  }
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void ExperimentConfig::validate() const {
  if (preset != "linear-1d" && preset != "linear-1d-known-safe")
    fail("preset '" + preset + "' is not known, use linear-1d or linear-1d-known-safe");
  if (!finite(domain_lo) || !finite(domain_hi) || !(domain_lo < domain_hi))
    fail("domain_lo/domain_hi must be finite with domain_lo < domain_hi");
  if (!finite(control_lo) || !finite(control_hi) || !(control_lo <= control_hi))
    fail("control_lo/control_hi must be finite with control_lo <= control_hi");
  if (!finite(tau) || !(tau > 0.0)) fail("tau must be finite and positive");
  if (!finite(signal_variance) || signal_variance < 0.0)
    fail("signal_variance must be finite and nonnegative");
  if (!finite(lengthscale) || !(lengthscale > 0.0))
    fail("lengthscale must be finite and positive");
  if (!finite(noise_variance) || !(noise_variance > 0.0))
    fail("noise_variance must be finite and positive");
  if (!finite(sub_gaussian_r) || sub_gaussian_r < 0.0)
    fail("sub_gaussian_r must be finite and nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (!finite(rkhs_bound_d) || rkhs_bound_d < 0.0)
    fail("rkhs_bound_d must be finite and nonnegative");
  if (!finite(rkhs_bound_d2) || rkhs_bound_d2 < 0.0)
    fail("rkhs_bound_d2 must be finite and nonnegative");
  if (!finite(barrier_rate) || !(barrier_rate > 0.0))
    fail("barrier_rate must be finite and positive");
  if (!finite(lyapunov_rate) || !(lyapunov_rate > 0.0))
    fail("lyapunov_rate must be finite and positive");
  if (rounds < 0) fail("rounds must be nonnegative");
  if (!finite(dt) || !(dt > 0.0)) fail("dt must be finite and positive");
  if (!finite(horizon) || !(horizon > 0.0)) fail("horizon must be finite and positive");
  if (control_candidates < 2) fail("control_candidates must be at least 2");
  if (!finite(core_level) || core_level < 0.0) fail("core_level must be finite and nonnegative");
  if (repair_sweeps < 0) fail("repair_sweeps must be nonnegative");
  if (!finite(policy_lipschitz) || policy_lipschitz < 0.0)
    fail("policy_lipschitz must be finite and nonnegative");
  if (!finite(initial_safe_level) || initial_safe_level < 0.0)
    fail("initial_safe_level must be finite and nonnegative");
  if (!finite(rollout_x0)) fail("rollout_x0 must be finite");
  if (measurement_mode != "direct" && measurement_mode != "finite-difference")
    fail("measurement_mode must be direct or finite-difference");
  if (!finite(fd_dt) || !(fd_dt > 0.0)) fail("fd_dt must be finite and positive");
  if (truth.mode != "rkhs-sample" && truth.mode != "closed-form")
    fail("truth.mode must be rkhs-sample or closed-form");
  if (truth.mode == "closed-form" && truth.name != "zero" && truth.name != "sine")
    fail("truth.name must be zero or sine");
  if (truth.centers < 1) fail("truth.centers must be positive");
  if (!finite(truth.amplitude)) fail("truth.amplitude must be finite");
  if (!finite(truth.omega)) fail("truth.omega must be finite");
}

ExperimentConfig config_from_json(const nlohmann::json& root) {
  if (!root.is_object()) fail("top level must be an object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : root.items()) {
    if (key == "preset")
      cfg.preset = as_string(value, key);
    else if (key == "domain_lo")
      cfg.domain_lo = as_number(value, key);
    else if (key == "domain_hi")
      cfg.domain_hi = as_number(value, key);
    else if (key == "control_lo")
      cfg.control_lo = as_number(value, key);
    else if (key == "control_hi")
      cfg.control_hi = as_number(value, key);
    else if (key == "tau")
      cfg.tau = as_number(value, key);
    else if (key == "signal_variance")
      cfg.signal_variance = as_number(value, key);
    else if (key == "lengthscale")
      cfg.lengthscale = as_number(value, key);
    else if (key == "noise_variance")
      cfg.noise_variance = as_number(value, key);
    else if (key == "sub_gaussian_r")
      cfg.sub_gaussian_r = as_number(value, key);
    else if (key == "delta")
      cfg.delta = as_number(value, key);
    else if (key == "rkhs_bound_d")
      cfg.rkhs_bound_d = as_number(value, key);
    else if (key == "rkhs_bound_d2")
      cfg.rkhs_bound_d2 = as_number(value, key);
    else if (key == "barrier_rate")
      cfg.barrier_rate = as_number(value, key);
    else if (key == "lyapunov_rate")
      cfg.lyapunov_rate = as_number(value, key);
    else if (key == "rounds")
      cfg.rounds = as_int(value, key);
    else if (key == "dt")
      cfg.dt = as_number(value, key);
    else if (key == "horizon")
      cfg.horizon = as_number(value, key);
    else if (key == "seed")
      cfg.seed = as_seed(value, key);
    else if (key == "control_candidates")
      cfg.control_candidates = as_int(value, key);
    else if (key == "core_level")
      cfg.core_level = as_number(value, key);
    else if (key == "repair_sweeps")
      cfg.repair_sweeps = as_int(value, key);
    else if (key == "policy_lipschitz")
      cfg.policy_lipschitz = as_number(value, key);
    else if (key == "initial_safe_level")
      cfg.initial_safe_level = as_number(value, key);
    else if (key == "rollout_x0")
      cfg.rollout_x0 = as_number(value, key);
    else if (key == "measurement_mode")
      cfg.measurement_mode = as_string(value, key);
    else if (key == "fd_dt")
      cfg.fd_dt = as_number(value, key);
    else if (key == "truth")
      parse_truth(value, cfg.truth);
    else
      fail("unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config: failed to parse '" + path + "': " + e.what());
  }
  return config_from_json(root);
}

}  // namespace safectrl
