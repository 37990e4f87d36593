#pragma once

#include <string>

#include "safectrl/config.hpp"

namespace safectrl {

// Runs the full learning loop described by cfg and writes the artifact set
// (rounds.csv, measurements.csv, certified.csv, policy.csv, trajectory.csv,
// summary.json) into out_dir, creating it if needed. Returns 0 when the
// closed-loop rollout stayed inside the domain with a nonnegative barrier,
// 1 otherwise. Setup problems throw.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// Recomputes every certificate recorded in an artifact directory by
// replaying the posterior from measurements.csv alone, and rechecks the
// policy file against the control box and its slope bound. Returns 0 when
// everything holds; otherwise fills *failure (if given) with the first
// offending record and returns 1.
int verify_artifacts(const ExperimentConfig& cfg, const std::string& dir, std::string* failure);

}  // namespace safectrl
