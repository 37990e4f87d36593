#pragma once

namespace safectrl {

// Twice continuously differentiable Mercer kernels on R. Only the squared
// exponential family is implemented; the enum keeps the config surface and
// the dispatch explicit for later families.
enum class KernelFamily { SquaredExponential };

// Global sup norms of the kernel and its first/second cross derivatives,
// taken over all pairs (x, x') in R^2. These feed the Lipschitz constants
// of the learned term and its derivative.
struct KernelSupNorms {
  double k;    // sup |k(x,x')|
  double dk;   // sup |dk/dx (x,x')|
  double ddk;  // sup |d^2 k / dx dx' (x,x')|
};

// Per-unit-norm envelopes of the reproducing-kernel Hilbert space: any f
// with ||f||_k <= B satisfies sup|f| <= B*value, sup|f'| <= B*deriv, and
// sup|f''| <= B*second_deriv. Each factor is the sup over x of the RKHS
// norm of the corresponding derivative of the feature map k(x, .).
struct RkhsEnvelope {
  double value;
  double deriv;
  double second_deriv;
};

class Kernel {
 public:
  // signal_variance >= 0 (zero gives the degenerate zero kernel),
  // lengthscale > 0. Violations throw std::invalid_argument.
  Kernel(KernelFamily family, double signal_variance, double lengthscale);

  double eval(double x, double xp) const;       // k(x, x')
  double eval_dx(double x, double xp) const;    // dk/dx, derivative in the first argument
  double eval_dxdx(double x, double xp) const;  // d^2 k / dx dx'

  KernelSupNorms sup_norms() const;
  RkhsEnvelope rkhs_envelope() const;

  KernelFamily family() const { return family_; }
  double signal_variance() const { return signal_variance_; }
  double lengthscale() const { return lengthscale_; }

 private:
  KernelFamily family_;
  double signal_variance_;
  double lengthscale_;
};

}  // namespace safectrl
