#include "safectrl/presets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safectrl {

ProblemSpec make_preset(const std::string& name, const DomainInterval& domain,
                        const DomainInterval& controls, double K_H, double K_V, double L_pi) {
  domain.validate("domain");
  controls.validate("controls");
  const double M = std::max(std::abs(domain.lo), std::abs(domain.hi));

  ProblemSpec spec;
  spec.domain = domain;
  spec.controls = controls;
  spec.K_H = K_H;
  spec.K_V = K_V;
  spec.f = [](double x) { return -x; };
  spec.g = [](double) { return 1.0; };
  spec.V = [](double x) { return 0.5 * x * x; };
  spec.dV = [](double x) { return x; };

  ProblemConstants& k = spec.constants;
  k.B_f = M;
  k.L_f = 1.0;
  k.B_g = 1.0;
  k.L_g = 0.0;
  k.L_dh = 2.0;
  k.L_h = 2.0 * M;
  k.L_V = M;
  k.L_dV = 1.0;
  k.B_pi = std::max(std::abs(controls.lo), std::abs(controls.hi));
  k.L_pi = L_pi;
  k.L_dF = 0.0;

  if (name == "linear-1d") {
    spec.h = [](double x) { return 0.8 - x * x; };
    spec.dh = [](double x) { return -2.0 * x; };
    spec.F = [](double y) { return y; };
    spec.dF = [](double) { return 1.0; };
    k.L_F = 1.0;
  } else if (name == "linear-1d-known-safe") {
    spec.h = [](double x) { return 1.0 - x * x; };
    spec.dh = [](double x) { return -2.0 * x; };
    spec.F = [](double) { return 0.0; };
    spec.dF = [](double) { return 0.0; };
    k.L_F = 0.0;
  } else {
    throw std::invalid_argument("presets: unknown preset '" + name +
                                "', known: linear-1d, linear-1d-known-safe");
  }
  spec.validate();
  return spec;
}

}  // namespace safectrl
