#include "safectrl/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace safectrl {

Kernel::Kernel(KernelFamily family, double signal_variance, double lengthscale)
    : family_(family), signal_variance_(signal_variance), lengthscale_(lengthscale) {
  if (!(signal_variance >= 0.0) || !std::isfinite(signal_variance))
    throw std::invalid_argument("kernel: signal_variance must be finite and >= 0");
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    throw std::invalid_argument("kernel: lengthscale must be finite and > 0");
}

double Kernel::eval(double x, double xp) const {
  const double r = x - xp;
  const double l2 = lengthscale_ * lengthscale_;
  return signal_variance_ * std::exp(-r * r / (2.0 * l2));
}

double Kernel::eval_dx(double x, double xp) const {
  const double r = x - xp;
  const double l2 = lengthscale_ * lengthscale_;
  return -signal_variance_ * r / l2 * std::exp(-r * r / (2.0 * l2));
}

double Kernel::eval_dxdx(double x, double xp) const {
  const double r = x - xp;
  const double l2 = lengthscale_ * lengthscale_;
  return signal_variance_ / l2 * (1.0 - r * r / l2) * std::exp(-r * r / (2.0 * l2));
}

KernelSupNorms Kernel::sup_norms() const {
  // For the squared exponential: |k| peaks at r = 0, |dk/dx| at |r| = l,
  // and |d^2 k / dx dx'| again at r = 0 (the interior extremum at r^2 = 3 l^2
  // is smaller by a factor 2 e^{-3/2}).
  const double l = lengthscale_;
  return KernelSupNorms{
      signal_variance_,
      signal_variance_ * std::exp(-0.5) / l,
      signal_variance_ / (l * l),
  };
}

RkhsEnvelope Kernel::rkhs_envelope() const {
  // ||k(x,.)||^2 = k(x,x) = s^2, ||d/dx k(x,.)||^2 = d^2k/dx dx'(x,x) = s^2/l^2,
  // ||d^2/dx^2 k(x,.)||^2 = d^4k/dx^2 dx'^2(x,x) = 3 s^2/l^4.
  const double s = std::sqrt(signal_variance_);
  const double l = lengthscale_;
  return RkhsEnvelope{s, s / l, std::sqrt(3.0) * s / (l * l)};
}

}  // namespace safectrl
