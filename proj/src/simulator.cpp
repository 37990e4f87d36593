#include "safectrl/simulator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace safectrl {

namespace {

double gaussian(double std_dev, std::mt19937_64& rng) {
  if (std_dev <= 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, std_dev);
  return dist(rng);
}

}  // namespace

TruthModel sample_rkhs_truth(const Kernel& kernel, double rkhs_bound, int centers,
                             std::uint64_t seed, const DomainInterval& domain,
                             double noise_std) {
  domain.validate("domain");
  if (centers < 1) throw std::invalid_argument("simulator: need at least one kernel center");
  if (!std::isfinite(rkhs_bound) || rkhs_bound < 0.0)
    throw std::invalid_argument("simulator: rkhs bound must be finite and nonnegative");
  if (!std::isfinite(noise_std) || noise_std < 0.0)
    throw std::invalid_argument("simulator: noise std must be finite and nonnegative");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> place(domain.lo, domain.hi);
  std::vector<double> cs(centers);
  for (double& c : cs) c = place(rng);
  Eigen::VectorXd alpha(centers);
  std::normal_distribution<double> weight(0.0, 1.0);
  for (int i = 0; i < centers; ++i) alpha[i] = weight(rng);

  Eigen::MatrixXd gram(centers, centers);
  for (int i = 0; i < centers; ++i)
    for (int j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = kernel.eval(cs[i], cs[j]);
  const double norm_sq = alpha.dot(gram * alpha);
  const double target = 0.9 * rkhs_bound;
  if (norm_sq > 0.0 && target > 0.0)
    alpha *= target / std::sqrt(norm_sq);
  else
    alpha.setZero();

  TruthModel truth;
  truth.noise_std = noise_std;
  truth.sub_gaussian_r = noise_std;
  truth.construction = "rkhs-sample";
  truth.rkhs_norm = (norm_sq > 0.0 && target > 0.0) ? target : 0.0;
  truth.d = [kernel, cs, alpha](double x) {
    double v = 0.0;
    for (int i = 0; i < alpha.size(); ++i) v += alpha[i] * kernel.eval(cs[i], x);
    return v;
  };
  truth.d_prime = [kernel, cs, alpha](double x) {
    double v = 0.0;
    for (int i = 0; i < alpha.size(); ++i) v += alpha[i] * kernel.eval_dx(x, cs[i]);
    return v;
  };
  return truth;
}

TruthModel closed_form_truth(const std::string& name, double amplitude, double omega,
                             double noise_std) {
  if (!std::isfinite(amplitude) || !std::isfinite(omega))
    throw std::invalid_argument("simulator: truth amplitude and omega must be finite");
  if (!std::isfinite(noise_std) || noise_std < 0.0)
    throw std::invalid_argument("simulator: noise std must be finite and nonnegative");
  TruthModel truth;
  truth.noise_std = noise_std;
  truth.sub_gaussian_r = noise_std;
  truth.construction = "closed-form:" + name;
  if (name == "zero") {
    truth.d = [](double) { return 0.0; };
    truth.d_prime = [](double) { return 0.0; };
  } else if (name == "sine") {
    truth.d = [amplitude, omega](double x) { return amplitude * std::sin(omega * x); };
    truth.d_prime = [amplitude, omega](double x) {
      return amplitude * omega * std::cos(omega * x);
    };
  } else {
    throw std::invalid_argument("simulator: unknown truth '" + name + "', known: zero, sine");
  }
  return truth;
}

Measurement measure(const TruthModel& truth, double x, double u, std::mt19937_64& rng) {
  if (!truth.d) throw std::invalid_argument("simulator: truth model has no disturbance");
  const double d = truth.d(x);
  Measurement m;
  m.x = x;
  m.u = u;
  m.d_hat = d + gaussian(truth.noise_std, rng);
  m.d2_hat = 0.5 * d * d + gaussian(truth.noise_std, rng);
  return m;
}

Measurement measure_finite_difference(const TruthModel& truth, const ProblemSpec& spec,
                                      double x, double u, double fd_dt, std::mt19937_64& rng) {
  if (!truth.d) throw std::invalid_argument("simulator: truth model has no disturbance");
  if (!(fd_dt > 0.0) || !std::isfinite(fd_dt))
    throw std::invalid_argument("simulator: finite-difference step must be finite and positive");
  const auto flow = [&](double y) { return spec.f(y) + spec.g(y) * u + truth.d(y); };
  const double k1 = flow(x);
  const double k2 = flow(x + 0.5 * fd_dt * k1);
  const double k3 = flow(x + 0.5 * fd_dt * k2);
  const double k4 = flow(x + fd_dt * k3);
  const double x1 = x + fd_dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const double fd = (x1 - x) / fd_dt - spec.f(x) - spec.g(x) * u;
  Measurement m;
  m.x = x;
  m.u = u;
  m.d_hat = fd + gaussian(truth.noise_std, rng);
  m.d2_hat = 0.5 * fd * fd + gaussian(truth.noise_std, rng);
  return m;
}

Trajectory rollout(const TruthModel& truth, const ProblemSpec& spec, const GridPolicy& policy,
                   const Grid& grid, double x0, double dt, double horizon) {
  spec.validate();
  if (!truth.d) throw std::invalid_argument("simulator: truth model has no disturbance");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("simulator: step size must be finite and positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("simulator: horizon must be finite and positive");
  if (!std::isfinite(x0) || !spec.domain.contains(x0))
    throw std::invalid_argument("simulator: initial state must lie in the domain");

  const auto control = [&](double y) { return policy.value_at(grid, y); };
  const auto flow = [&](double y) { return spec.f(y) + spec.g(y) * control(y) + truth.d(y); };

  Trajectory traj;
  const auto record = [&](double t, double x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(control(x));
    traj.v_values.push_back(spec.V(x));
    traj.h_values.push_back(spec.h(x) + spec.F(truth.d(x)));
  };
  record(0.0, x0);

  const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  double x = x0;
  for (int s = 1; s <= steps; ++s) {
    const double k1 = flow(x);
    const double k2 = flow(x + 0.5 * dt * k1);
    const double k3 = flow(x + 0.5 * dt * k2);
    const double k4 = flow(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = s * dt;
    record(t, x);
    if (!spec.domain.contains(x)) {
      traj.exited = true;
      traj.exit_time = t;
      break;
    }
  }
  return traj;
}

}  // namespace safectrl
