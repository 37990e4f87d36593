#pragma once

#include <string>

#include "safectrl/certificates.hpp"

namespace safectrl {

// Named problem instances with all Lipschitz and magnitude constants derived
// from the requested domain and control box.
//
//   "linear-1d"             f = -x, g = 1, h = 0.8 - x^2, barrier transform
//                           F = identity (the disturbance enters the safety
//                           measure directly), V = x^2 / 2.
//   "linear-1d-known-safe"  same plant with h = 1 - x^2 and F = 0: the safe
//                           region does not depend on the disturbance.
ProblemSpec make_preset(const std::string& name, const DomainInterval& domain,
                        const DomainInterval& controls, double K_H, double K_V, double L_pi);

}  // namespace safectrl
