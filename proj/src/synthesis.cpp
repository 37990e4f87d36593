#include "safectrl/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safectrl {

namespace {

// Margin scores are O(1) for sane problems; anything below -kBarrierPenalty/2
// is read as "barrier unattainable here".
constexpr double kBarrierPenalty = 1.0e3;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct BestControl {
  double u = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

// Candidate sweep plus golden-section refinement around the best bracket.
// Ties keep the earliest candidate, which makes the search deterministic.
BestControl best_control(const std::function<double(double)>& raw_score,
                         const DomainInterval& box, int candidates) {
  BestControl best{box.lo, -std::numeric_limits<double>::infinity()};
  const auto score = [&](double u) {
    const double s = raw_score(u);
    if (s > best.score) {
      best.score = s;
      best.u = u;
    }
    return s;
  };
  if (!(box.hi > box.lo) || candidates < 2) {
    score(box.lo);
    return best;
  }
  const double step = box.length() / (candidates - 1);
  for (int k = 0; k < candidates; ++k) score(box.lo + step * k);
  double a = std::max(box.lo, best.u - step);
  double b = std::min(box.hi, best.u + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = score(c);
  double fd = score(d);
  for (int it = 0; it < 60; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = score(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = score(d);
    }
  }
  return best;
}

// Superlevel set {u in box : f(u) >= 0} of a concave margin, located by
// bisection from a seed with f(seed) >= 0. The returned endpoints themselves
// evaluate >= 0, so controls clamped onto them stay admissible.
ControlBand level_set(const std::function<double(double)>& f, const DomainInterval& box,
                      double seed) {
  ControlBand band{seed, seed};
  if (f(box.lo) >= 0.0) {
    band.lo = box.lo;
  } else {
    double bad = box.lo;
    double good = seed;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (bad + good);
      (f(mid) >= 0.0 ? good : bad) = mid;
    }
    band.lo = good;
  }
  if (f(box.hi) >= 0.0) {
    band.hi = box.hi;
  } else {
    double good = seed;
    double bad = box.hi;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (good + bad);
      (f(mid) >= 0.0 ? good : bad) = mid;
    }
    band.hi = good;
  }
  return band;
}

}  // namespace

int Grid::nearest(double x) const {
  if (nodes.empty()) throw std::invalid_argument("synthesis: grid has no nodes");
  if (nodes.size() == 1) return 0;
  const double lo = nodes.front();
  const double hi = nodes.back();
  const double span = hi - lo;
  const double t = (clamp(x, lo, hi) - lo) / span * (nodes.size() - 1);
  const int i = static_cast<int>(std::lround(t));
  return std::min(std::max(i, 0), static_cast<int>(nodes.size()) - 1);
}

Grid build_grid(const DomainInterval& domain, double tau) {
  domain.validate("domain");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("synthesis: tau must be finite and positive");
  Grid grid;
  grid.tau = tau;
  const double len = domain.length();
  if (tau >= len) {
    grid.nodes.push_back(0.5 * (domain.lo + domain.hi));
    return grid;
  }
  const int intervals = static_cast<int>(std::ceil(len / tau));
  grid.nodes.resize(intervals + 1);
  for (int i = 0; i <= intervals; ++i) grid.nodes[i] = domain.lo + len * i / intervals;
  grid.nodes.back() = domain.hi;
  return grid;
}

double GridPolicy::value_at(const Grid& grid, double x) const {
  if (static_cast<int>(values.size()) != grid.size())
    throw std::invalid_argument("synthesis: policy does not match the grid");
  if (values.empty()) throw std::invalid_argument("synthesis: policy has no values");
  if (x <= grid.nodes.front()) return values.front();
  if (x >= grid.nodes.back()) return values.back();
  int i = grid.nearest(x);
  if (grid.nodes[i] > x) --i;
  const double w = (x - grid.nodes[i]) / (grid.nodes[i + 1] - grid.nodes[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

std::vector<double> project_lipschitz(const Grid& grid, const std::vector<ControlBand>& bands,
                                      const std::vector<double>& preferred,
                                      double lipschitz_bound, const DomainInterval& box,
                                      const std::function<double(int, double)>& score,
                                      int repair_sweeps) {
  const int n = grid.size();
  if (static_cast<int>(bands.size()) != n || static_cast<int>(preferred.size()) != n)
    throw std::invalid_argument("synthesis: bands and preferred controls must cover every node");
  if (!std::isfinite(lipschitz_bound) || lipschitz_bound < 0.0)
    throw std::invalid_argument("synthesis: policy slope bound must be finite and nonnegative");
  box.validate("controls");

  std::vector<ControlBand> iv(n);
  for (int i = 0; i < n; ++i) {
    double lo = std::max(bands[i].lo, box.lo);
    double hi = std::min(bands[i].hi, box.hi);
    if (!(lo <= hi)) {
      lo = box.lo;
      hi = box.hi;
    }
    iv[i] = {lo, hi};
  }

  // Chain consistency: after the forward and backward passes every band is
  // reachable from both neighbors under the slope bound, so the directional
  // sweeps below never run out of options. A band emptied by the
  // intersection is widened back to the incoming slope window, giving up
  // that node's own constraint instead of failing.
  for (int i = 1; i < n; ++i) {
    const double step = lipschitz_bound * (grid.nodes[i] - grid.nodes[i - 1]);
    const double wlo = std::max(iv[i - 1].lo - step, box.lo);
    const double whi = std::min(iv[i - 1].hi + step, box.hi);
    double lo = std::max(iv[i].lo, wlo);
    double hi = std::min(iv[i].hi, whi);
    if (!(lo <= hi)) {
      lo = wlo;
      hi = whi;
    }
    iv[i] = {lo, hi};
  }
  for (int i = n - 2; i >= 0; --i) {
    const double step = lipschitz_bound * (grid.nodes[i + 1] - grid.nodes[i]);
    const double wlo = std::max(iv[i + 1].lo - step, box.lo);
    const double whi = std::min(iv[i + 1].hi + step, box.hi);
    double lo = std::max(iv[i].lo, wlo);
    double hi = std::min(iv[i].hi, whi);
    if (!(lo <= hi)) {
      lo = wlo;
      hi = whi;
    }
    iv[i] = {lo, hi};
  }

  // Two directional nearest-to-preferred sweeps, averaged. The average of
  // two slope-feasible in-band chains is itself slope-feasible and in-band,
  // and symmetric inputs yield symmetric policies.
  std::vector<double> fwd(n), bwd(n), out(n);
  fwd[0] = clamp(preferred[0], iv[0].lo, iv[0].hi);
  for (int i = 1; i < n; ++i) {
    const double step = lipschitz_bound * (grid.nodes[i] - grid.nodes[i - 1]);
    double lo = std::max(iv[i].lo, fwd[i - 1] - step);
    double hi = std::min(iv[i].hi, fwd[i - 1] + step);
    if (!(lo <= hi)) {
      lo = std::max(box.lo, fwd[i - 1] - step);
      hi = std::min(box.hi, fwd[i - 1] + step);
    }
    fwd[i] = clamp(preferred[i], lo, hi);
  }
  bwd[n - 1] = clamp(preferred[n - 1], iv[n - 1].lo, iv[n - 1].hi);
  for (int i = n - 2; i >= 0; --i) {
    const double step = lipschitz_bound * (grid.nodes[i + 1] - grid.nodes[i]);
    double lo = std::max(iv[i].lo, bwd[i + 1] - step);
    double hi = std::min(iv[i].hi, bwd[i + 1] + step);
    if (!(lo <= hi)) {
      lo = std::max(box.lo, bwd[i + 1] - step);
      hi = std::min(box.hi, bwd[i + 1] + step);
    }
    bwd[i] = clamp(preferred[i], lo, hi);
  }
  for (int i = 0; i < n; ++i) out[i] = 0.5 * (fwd[i] + bwd[i]);

  // Coordinate repair: re-sample each node inside the window its neighbors
  // allow and keep strict score improvements. The current value is always
  // inside the window, so the slope bound survives every move.
  constexpr int kBandSamples = 17;
  for (int sweep = 0; sweep < repair_sweeps; ++sweep) {
    const bool forward = (sweep % 2 == 0);
    for (int k = 0; k < n; ++k) {
      const int i = forward ? k : n - 1 - k;
      double lo = box.lo;
      double hi = box.hi;
      if (i > 0) {
        const double step = lipschitz_bound * (grid.nodes[i] - grid.nodes[i - 1]);
        lo = std::max(lo, out[i - 1] - step);
        hi = std::min(hi, out[i - 1] + step);
      }
      if (i + 1 < n) {
        const double step = lipschitz_bound * (grid.nodes[i + 1] - grid.nodes[i]);
        lo = std::max(lo, out[i + 1] - step);
        hi = std::min(hi, out[i + 1] + step);
      }
      if (!(lo <= hi)) continue;
      double best_u = out[i];
      double best_s = score(i, out[i]);
      for (int s = 0; s < kBandSamples; ++s) {
        const double u = lo + (hi - lo) * s / (kBandSamples - 1);
        const double sc = score(i, u);
        if (sc > best_s) {
          best_s = sc;
          best_u = u;
        }
      }
      out[i] = best_u;
    }
  }
  return out;
}

RoundResult optimize_round(const SynthState& state, const ProblemSpec& spec,
                           const GpPosterior& post, const ConfidenceConfig& cfg,
                           const Grid& grid, const LipschitzConstants& lip,
                           const SynthOptions& opts) {
  spec.validate();
  const int n = grid.size();
  if (static_cast<int>(state.safe_set.size()) != n)
    throw std::invalid_argument("synthesis: safe-set mask does not match the grid");
  if (!state.policy.values.empty() && static_cast<int>(state.policy.values.size()) != n)
    throw std::invalid_argument("synthesis: policy does not match the grid");

  RoundResult rr;
  rr.gamma = info_gain(post, cfg.noise_variance);
  rr.sqrt_beta_d = beta_sqrt(cfg, cfg.rkhs_bound_d, rr.gamma);
  rr.policy = state.policy;
  if (rr.policy.values.empty())
    rr.policy.values.assign(n, clamp(0.0, spec.controls.lo, spec.controls.hi));
  rr.policy.lipschitz_bound = spec.constants.L_pi;
  rr.level_c = state.level_c;

  const double tau = grid.tau;
  std::vector<std::uint8_t> in_level(n, 0);
  std::vector<std::uint8_t> exempt(n, 0);
  for (int i = 0; i < n; ++i) {
    const double x = grid.nodes[i];
    in_level[i] = in_safe_level_set(spec, post, cfg, x) ? 1 : 0;
    exempt[i] = (in_level[i] != 0 && opts.core_level > 0.0 && spec.V(x) <= opts.core_level) ? 1 : 0;
  }

  const auto full_margin = [&](int i, double u) {
    const CertBounds b = cert_bounds(spec, post, cfg, grid.nodes[i], u);
    return std::min(-b.u_vdot - lip.vdot * tau, b.l_hdot - lip.hdot * tau);
  };
  const auto barrier_margin = [&](int i, double u) {
    const CertBounds b = cert_bounds(spec, post, cfg, grid.nodes[i], u);
    return b.l_hdot - lip.hdot * tau;
  };
  // Exempt nodes are judged on the barrier margin alone, so a control that
  // breaks it is penalized out of contention; among barrier-passing
  // controls the full certificate is still chased so that exempt nodes can
  // join the certified set when the chain allows it.
  const auto score = [&](int i, double u) {
    if (exempt[i] != 0) {
      const double bar = barrier_margin(i, u);
      if (bar < 0.0) return bar - kBarrierPenalty;
    }
    return full_margin(i, u);
  };

  std::vector<ControlBand> bands(n, ControlBand{spec.controls.lo, spec.controls.hi});
  std::vector<double> preferred(rr.policy.values);
  for (int i = 0; i < n; ++i) {
    if (in_level[i] == 0) continue;
    const BestControl bc =
        best_control([&](double u) { return score(i, u); }, spec.controls, opts.control_candidates);
    preferred[i] = bc.u;
    if (exempt[i] != 0) {
      if (bc.score > -0.5 * kBarrierPenalty)
        bands[i] = level_set([&](double u) { return barrier_margin(i, u); }, spec.controls, bc.u);
    } else if (bc.score >= 0.0) {
      bands[i] = level_set([&](double u) { return full_margin(i, u); }, spec.controls, bc.u);
    }
  }

  GridPolicy pol;
  pol.lipschitz_bound = spec.constants.L_pi;
  pol.values = project_lipschitz(grid, bands, preferred, spec.constants.L_pi, spec.controls,
                                 score, opts.repair_sweeps);

  std::vector<std::uint8_t> full_ok(n, 0), scan_ok(n, 0);
  for (int i = 0; i < n; ++i) {
    if (in_level[i] == 0) continue;
    const double u = pol.values[i];
    full_ok[i] = in_certified_set(spec, post, cfg, lip, grid.nodes[i], u, tau) ? 1 : 0;
    scan_ok[i] = (full_ok[i] != 0 || (exempt[i] != 0 && barrier_margin(i, u) >= 0.0)) ? 1 : 0;
  }

  // Monotone level scan, collapsed: the chosen level is the largest node
  // value of V strictly below every failing level-set node.
  double bad_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (in_level[i] != 0 && scan_ok[i] == 0) bad_min = std::min(bad_min, spec.V(grid.nodes[i]));
  double c = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (in_level[i] == 0) continue;
    const double v = spec.V(grid.nodes[i]);
    if (v < bad_min) c = std::max(c, v);
  }
  if (!std::isfinite(c)) return rr;  // infeasible: previous policy and level, empty node sets

  rr.feasible = true;
  rr.policy = pol;
  rr.level_c = c;
  for (int i = 0; i < n; ++i) {
    if (in_level[i] == 0 || spec.V(grid.nodes[i]) > c) continue;
    rr.eligible.push_back(i);
    if (full_ok[i] != 0) rr.certified.push_back(i);
  }
  return rr;
}

int select_sample(const SynthState& state, const GpPosterior& post, const Grid& grid) {
  if (static_cast<int>(state.safe_set.size()) != grid.size())
    throw std::invalid_argument("synthesis: safe-set mask does not match the grid");
  int best = -1;
  double best_sigma = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    if (state.safe_set[i] == 0) continue;
    const double sigma = post.query_d(grid.nodes[i]).std;
    if (sigma > best_sigma) {
      best_sigma = sigma;
      best = i;
    }
  }
  if (best < 0) throw std::runtime_error("synthesis: cannot sample from an empty safe set");
  return best;
}

StepResult safe_learning_step(const SynthState& state, const ProblemSpec& spec,
                              const GpPosterior& post, const ConfidenceConfig& cfg,
                              const Grid& grid, const LipschitzConstants& lip,
                              const SynthOptions& opts,
                              const std::function<Measurement(double, double)>& truth_channel) {
  if (!truth_channel)
    throw std::invalid_argument("synthesis: truth channel must be callable");
  StepResult sr{state, post, optimize_round(state, spec, post, cfg, grid, lip, opts), -1, {}};
  sr.state.round = state.round + 1;
  sr.state.policy = sr.round.policy;
  sr.state.level_c = sr.round.level_c;
  sr.state.eligible = sr.round.eligible;
  for (int i : sr.round.certified) sr.state.safe_set[i] = 1;
  sr.sample_index = select_sample(sr.state, post, grid);
  const double x = grid.nodes[sr.sample_index];
  const double u = sr.state.policy.value_at(grid, x);
  const Measurement raw = truth_channel(x, u);
  sr.measurement = Measurement{x, u, raw.d_hat, raw.d2_hat};
  sr.posterior = post.add_measurement(sr.measurement);
  return sr;
}

}  // namespace safectrl
