#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "safectrl/certificates.hpp"
#include "safectrl/confidence.hpp"
#include "safectrl/gp.hpp"

namespace safectrl {

// Uniform discretization of the state domain. Every point of the domain is
// within tau/2 of some node; endpoints are nodes except in the degenerate
// single-node case.
struct Grid {
  double tau = 0.0;
  std::vector<double> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
  int nearest(double x) const;
};

Grid build_grid(const DomainInterval& domain, double tau);

// Node-valued control law, extended off-node by linear interpolation (which
// preserves the Lipschitz bound and the control box).
struct GridPolicy {
  std::vector<double> values;
  double lipschitz_bound = 0.0;

  double value_at(const Grid& grid, double x) const;
};

// Admissible control interval at one node (certificate level sets are
// intervals because both certified margins are concave in u).
struct ControlBand {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthOptions {
  // Uniform control candidates per node; the best bracket is refined by a
  // golden-section pass.
  int control_candidates = 41;
  // Nodes with V(x) <= core_level (when positive) are only required to pass
  // the barrier margin during the level scan. The discretized stability
  // margin is unattainable in any neighborhood of V's minimizer, where
  // Vdot + K_V V -> 0 regardless of u; without the exemption no level is
  // feasible. Such nodes enter the certified set only if they happen to
  // pass the full certificate anyway.
  double core_level = 0.0;
  // Coordinate-wise margin improvement passes after the band projection.
  int repair_sweeps = 2;
};

struct SynthState {
  int round = 0;
  std::vector<std::uint8_t> safe_set;  // mask over grid nodes
  GridPolicy policy;
  double level_c = 0.0;
  std::vector<int> eligible;  // nodes of the last round's level scan
};

struct RoundResult {
  GridPolicy policy;
  double level_c = 0.0;
  std::vector<int> eligible;   // level-set nodes inside the chosen sublevel set
  std::vector<int> certified;  // eligible nodes passing the full discretized certificate
  bool feasible = false;
  double gamma = 0.0;
  double sqrt_beta_d = 0.0;
};

struct StepResult {
  SynthState state;
  GpPosterior posterior;
  RoundResult round;
  int sample_index = -1;
  Measurement measurement;
};

// Lipschitz-feasible policy selection within per-node admissible bands.
// Forward/backward interval propagation prunes each band to the values
// reachable under the slope bound (a band emptied by propagation is widened
// back to the incoming slope window, sacrificing that node's constraint);
// two directional sweeps then pick the value nearest each node's preferred
// control and are averaged, which keeps symmetric inputs symmetric; finally
// repair sweeps re-sample each node inside the window its neighbors allow
// and keep strict score improvements. The returned values satisfy the slope
// bound on every adjacent pair and lie in the box, always.
std::vector<double> project_lipschitz(const Grid& grid, const std::vector<ControlBand>& bands,
                                      const std::vector<double>& preferred,
                                      double lipschitz_bound, const DomainInterval& box,
                                      const std::function<double(int, double)>& score,
                                      int repair_sweeps);

// One policy-optimization round: computes the pessimistic level set, per
// node the margin-optimal control and the admissible band, projects onto
// the policy class, and picks the largest sublevel set of V whose level
// nodes all pass. An infeasible round returns the previous policy and level
// with empty node sets, flagged, no throw.
RoundResult optimize_round(const SynthState& state, const ProblemSpec& spec,
                           const GpPosterior& post, const ConfidenceConfig& cfg,
                           const Grid& grid, const LipschitzConstants& lip,
                           const SynthOptions& opts);

// Largest-posterior-uncertainty node inside the safe set; ties break to the
// smallest index. Throws std::runtime_error on an empty safe set.
int select_sample(const SynthState& state, const GpPosterior& post, const Grid& grid);

// One full learning round: optimize, grow the safe set by the certified
// nodes, select the next measurement point inside the grown set, and update
// the posterior with a measurement from truth_channel(x, u).
StepResult safe_learning_step(const SynthState& state, const ProblemSpec& spec,
                              const GpPosterior& post, const ConfidenceConfig& cfg,
                              const Grid& grid, const LipschitzConstants& lip,
                              const SynthOptions& opts,
                              const std::function<Measurement(double, double)>& truth_channel);

}  // namespace safectrl
