#include "safectrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "safectrl/certificates.hpp"
#include "safectrl/confidence.hpp"
#include "safectrl/gp.hpp"
#include "safectrl/kernel.hpp"
#include "safectrl/presets.hpp"
#include "safectrl/simulator.hpp"
#include "safectrl/synthesis.hpp"

namespace safectrl {

namespace {

struct Assembly {
  Kernel kernel;
  ProblemSpec spec;
  ConfidenceConfig ccfg;
  LipschitzConstants lip;
  Grid grid;
  SynthOptions opts;
};

Assembly assemble(const ExperimentConfig& cfg) {
  Kernel kernel(KernelFamily::SquaredExponential, cfg.signal_variance, cfg.lengthscale);
  ProblemSpec spec =
      make_preset(cfg.preset, DomainInterval{cfg.domain_lo, cfg.domain_hi},
                  DomainInterval{cfg.control_lo, cfg.control_hi}, cfg.barrier_rate,
                  cfg.lyapunov_rate, cfg.policy_lipschitz);
  ConfidenceConfig ccfg;
  ccfg.delta = cfg.delta;
  ccfg.rkhs_bound_d = cfg.rkhs_bound_d;
  ccfg.rkhs_bound_d2 = cfg.rkhs_bound_d2;
  ccfg.sub_gaussian_r = cfg.sub_gaussian_r;
  ccfg.noise_variance = cfg.noise_variance;
  ccfg.validate();
  LipschitzConstants lip = lipschitz_constants(spec, kernel, ccfg);
  Grid grid = build_grid(spec.domain, cfg.tau);
  SynthOptions opts;
  opts.control_candidates = cfg.control_candidates;
  opts.core_level = cfg.core_level;
  opts.repair_sweeps = cfg.repair_sweeps;
  return Assembly{std::move(kernel), std::move(spec), ccfg, lip, std::move(grid), opts};
}

TruthModel build_truth(const ExperimentConfig& cfg, const Kernel& kernel,
                       const ProblemSpec& spec) {
  const double noise_std = std::sqrt(cfg.noise_variance);
  if (cfg.truth.mode == "rkhs-sample")
    return sample_rkhs_truth(kernel, cfg.rkhs_bound_d, cfg.truth.centers, cfg.seed, spec.domain,
                             noise_std);
  return closed_form_truth(cfg.truth.name, cfg.truth.amplitude, cfg.truth.omega, noise_std);
}

// Shortest exact decimal form so reruns produce byte-identical artifacts
// and the verifier round-trips every double bit for bit.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("experiment: cannot write '" + path.string() + "'");
  return out;
}

int count_mask(const std::vector<std::uint8_t>& mask) {
  int n = 0;
  for (std::uint8_t m : mask) n += (m != 0) ? 1 : 0;
  return n;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

bool parse_int(const std::string& s, int& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') return false;
  out = static_cast<int>(v);
  return true;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool read_csv(const std::filesystem::path& path, const std::string& header,
              std::vector<std::vector<std::string>>& rows, std::string& error) {
  std::ifstream in(path);
  if (!in) {
    error = "cannot read '" + path.string() + "'";
    return false;
  }
  std::string line;
  if (!std::getline(in, line) || line != header) {
    error = "'" + path.string() + "' does not start with header '" + header + "'";
    return false;
  }
  const std::size_t width = split_csv(header).size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != width) {
      error = "'" + path.string() + "' has a row with " + std::to_string(fields.size()) +
              " fields, expected " + std::to_string(width);
      return false;
    }
    rows.push_back(std::move(fields));
  }
  return true;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const Assembly a = assemble(cfg);
  const TruthModel truth = build_truth(cfg, a.kernel, a.spec);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  GpPosterior post(a.kernel, cfg.noise_variance);
  SynthState state;
  state.safe_set.assign(a.grid.size(), 0);
  state.level_c = cfg.initial_safe_level;
  // Given-safe seed nodes: the V sublevel from the config, plus always the
  // node minimizing V so the sampler has somewhere to start.
  int v_argmin = 0;
  double v_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.grid.size(); ++i) {
    const double v = a.spec.V(a.grid.nodes[i]);
    if (v <= cfg.initial_safe_level) state.safe_set[i] = 1;
    if (v < v_min) {
      v_min = v;
      v_argmin = i;
    }
  }
  state.safe_set[v_argmin] = 1;
  const int initial_size = count_mask(state.safe_set);

  std::mt19937_64 meas_rng(cfg.seed + 1);
  const auto channel = [&](double x, double u) {
    if (cfg.measurement_mode == "direct") return measure(truth, x, u, meas_rng);
    return measure_finite_difference(truth, a.spec, x, u, cfg.fd_dt, meas_rng);
  };

  std::ofstream rounds_csv = open_out(dir / "rounds.csv");
  std::ofstream meas_csv = open_out(dir / "measurements.csv");
  std::ofstream cert_csv = open_out(dir / "certified.csv");
  rounds_csv << "round,safe_set_size,level_c,x_sample,gamma,sqrt_beta_d,feasible\n";
  meas_csv << "round,x,u,d_hat,d2_hat\n";
  cert_csv << "round,index,x,u\n";

  int feasible_rounds = 0;
  for (int n = 1; n <= cfg.rounds; ++n) {
    StepResult step =
        safe_learning_step(state, a.spec, post, a.ccfg, a.grid, a.lip, a.opts, channel);
    rounds_csv << n << ',' << count_mask(step.state.safe_set) << ','
               << fmt(step.round.level_c) << ',' << fmt(a.grid.nodes[step.sample_index]) << ','
               << fmt(step.round.gamma) << ',' << fmt(step.round.sqrt_beta_d) << ','
               << (step.round.feasible ? 1 : 0) << '\n';
    meas_csv << n << ',' << fmt(step.measurement.x) << ',' << fmt(step.measurement.u) << ','
             << fmt(step.measurement.d_hat) << ',' << fmt(step.measurement.d2_hat) << '\n';
    for (int i : step.round.certified)
      cert_csv << n << ',' << i << ',' << fmt(a.grid.nodes[i]) << ','
               << fmt(step.round.policy.values[i]) << '\n';
    if (step.round.feasible) ++feasible_rounds;
    state = std::move(step.state);
    post = std::move(step.posterior);
  }

  if (state.policy.values.empty()) {
    state.policy.values.assign(a.grid.size(),
                               a.spec.controls.clamp(0.0));
    state.policy.lipschitz_bound = a.spec.constants.L_pi;
  }
  std::ofstream policy_csv = open_out(dir / "policy.csv");
  policy_csv << "index,x,u\n";
  for (int i = 0; i < a.grid.size(); ++i)
    policy_csv << i << ',' << fmt(a.grid.nodes[i]) << ',' << fmt(state.policy.values[i]) << '\n';

  const Trajectory traj = rollout(truth, a.spec, state.policy, a.grid,
                                  a.spec.domain.clamp(cfg.rollout_x0), cfg.dt, cfg.horizon);
  std::ofstream traj_csv = open_out(dir / "trajectory.csv");
  traj_csv << "t,x,u,V,H\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    traj_csv << fmt(traj.times[k]) << ',' << fmt(traj.states[k]) << ',' << fmt(traj.controls[k])
             << ',' << fmt(traj.v_values[k]) << ',' << fmt(traj.h_values[k]) << '\n';

  double min_h = std::numeric_limits<double>::infinity();
  for (double h : traj.h_values) min_h = std::min(min_h, h);
  const bool violation = traj.exited || min_h < 0.0;

  nlohmann::json summary;
  summary["rounds"] = cfg.rounds;
  summary["feasible_rounds"] = feasible_rounds;
  summary["initial_safe_set_size"] = initial_size;
  summary["final_safe_set_size"] = count_mask(state.safe_set);
  summary["final_level"] = state.level_c;
  summary["gamma"] = info_gain(post, cfg.noise_variance);
  summary["min_barrier"] = min_h;
  summary["final_v"] = traj.v_values.empty() ? 0.0 : traj.v_values.back();
  summary["exited"] = traj.exited;
  summary["violation"] = violation;
  summary["truth_construction"] = truth.construction;
  summary["truth_rkhs_norm"] = truth.rkhs_norm;
  std::ofstream summary_json = open_out(dir / "summary.json");
  summary_json << summary.dump(2) << '\n';

  return violation ? 1 : 0;
}

int verify_artifacts(const ExperimentConfig& cfg, const std::string& dir_in,
                     std::string* failure) {
  const auto fail = [&](const std::string& msg) {
    if (failure) *failure = msg;
    return 1;
  };
  cfg.validate();
  const Assembly a = assemble(cfg);
  const std::filesystem::path dir(dir_in);
  std::string err;

  std::vector<std::vector<std::string>> policy_rows, meas_rows, cert_rows;
  if (!read_csv(dir / "policy.csv", "index,x,u", policy_rows, err)) return fail(err);
  if (!read_csv(dir / "measurements.csv", "round,x,u,d_hat,d2_hat", meas_rows, err))
    return fail(err);
  if (!read_csv(dir / "certified.csv", "round,index,x,u", cert_rows, err)) return fail(err);

  // Policy file: one row per node in order, controls in the box, slope bound
  // between neighbors.
  if (static_cast<int>(policy_rows.size()) != a.grid.size())
    return fail("policy.csv has " + std::to_string(policy_rows.size()) + " rows, the grid has " +
                std::to_string(a.grid.size()) + " nodes");
  std::vector<double> policy_values(policy_rows.size());
  for (std::size_t r = 0; r < policy_rows.size(); ++r) {
    int index = 0;
    double x = 0.0, u = 0.0;
    if (!parse_int(policy_rows[r][0], index) || !parse_double(policy_rows[r][1], x) ||
        !parse_double(policy_rows[r][2], u))
      return fail("policy.csv row " + std::to_string(r + 1) + " is not numeric");
    if (index != static_cast<int>(r))
      return fail("policy.csv row " + std::to_string(r + 1) + " has index " +
                  std::to_string(index));
    if (std::abs(x - a.grid.nodes[r]) > 1.0e-12)
      return fail("policy.csv node " + std::to_string(r) + " is not on the grid");
    if (u < a.spec.controls.lo - 1.0e-12 || u > a.spec.controls.hi + 1.0e-12)
      return fail("policy.csv node " + std::to_string(r) + " leaves the control box");
    policy_values[r] = u;
  }
  for (std::size_t r = 0; r + 1 < policy_values.size(); ++r) {
    const double step = a.grid.nodes[r + 1] - a.grid.nodes[r];
    if (std::abs(policy_values[r + 1] - policy_values[r]) >
        a.spec.constants.L_pi * step + 1.0e-9)
      return fail("policy.csv breaks the slope bound between nodes " + std::to_string(r) +
                  " and " + std::to_string(r + 1));
  }

  std::map<int, std::vector<Measurement>> meas_by_round;
  for (std::size_t r = 0; r < meas_rows.size(); ++r) {
    int round = 0;
    Measurement m;
    if (!parse_int(meas_rows[r][0], round) || !parse_double(meas_rows[r][1], m.x) ||
        !parse_double(meas_rows[r][2], m.u) || !parse_double(meas_rows[r][3], m.d_hat) ||
        !parse_double(meas_rows[r][4], m.d2_hat))
      return fail("measurements.csv row " + std::to_string(r + 1) + " is not numeric");
    meas_by_round[round].push_back(m);
  }

  struct CertRow {
    int index = 0;
    double x = 0.0;
    double u = 0.0;
  };
  std::map<int, std::vector<CertRow>> cert_by_round;
  for (std::size_t r = 0; r < cert_rows.size(); ++r) {
    int round = 0;
    CertRow row;
    if (!parse_int(cert_rows[r][0], round) || !parse_int(cert_rows[r][1], row.index) ||
        !parse_double(cert_rows[r][2], row.x) || !parse_double(cert_rows[r][3], row.u))
      return fail("certified.csv row " + std::to_string(r + 1) + " is not numeric");
    if (row.index < 0 || row.index >= a.grid.size())
      return fail("certified.csv row " + std::to_string(r + 1) + " indexes off the grid");
    if (std::abs(row.x - a.grid.nodes[row.index]) > 1.0e-12)
      return fail("certified.csv row " + std::to_string(r + 1) + " is not on the grid");
    cert_by_round[round].push_back(row);
  }

  // Replay: certificates claimed in round n must hold under the posterior
  // built from the measurements of rounds before n, exactly as during the
  // run.
  int last_round = 0;
  if (!meas_by_round.empty()) last_round = std::max(last_round, meas_by_round.rbegin()->first);
  if (!cert_by_round.empty()) last_round = std::max(last_round, cert_by_round.rbegin()->first);
  GpPosterior post(a.kernel, cfg.noise_variance);
  for (int n = 1; n <= last_round; ++n) {
    const auto certs = cert_by_round.find(n);
    if (certs != cert_by_round.end()) {
      for (const CertRow& row : certs->second) {
        if (!in_certified_set(a.spec, post, a.ccfg, a.lip, a.grid.nodes[row.index], row.u,
                              a.grid.tau))
          return fail("certified node " + std::to_string(row.index) + " in round " +
                      std::to_string(n) + " fails the certificate recheck");
      }
    }
    const auto ms = meas_by_round.find(n);
    if (ms != meas_by_round.end())
      for (const Measurement& m : ms->second) post = post.add_measurement(m);
  }

  // The final certified round was produced by the shipped policy; its
  // controls must match the policy file at those nodes.
  if (!cert_by_round.empty()) {
    const auto& [round, rows] = *cert_by_round.rbegin();
    for (const CertRow& row : rows)
      if (std::abs(row.u - policy_values[row.index]) > 1.0e-9)
        return fail("certified node " + std::to_string(row.index) + " in round " +
                    std::to_string(round) + " disagrees with policy.csv");
  }
  return 0;
}

}  // namespace safectrl
