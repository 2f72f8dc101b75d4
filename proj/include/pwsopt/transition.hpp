#pragma once

#include <functional>
#include <string>

namespace pwsopt {

/// Monotone ramp from 0 to 1 across [-1, 1] used to blend the two vector
/// fields. eval must clamp exactly outside [-1, 1]; deriv and deriv2 must
/// vanish at the patch boundary so the blended field keeps Lipschitz first
/// and second derivatives.
struct TransitionFunction {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  std::function<double(double)> deriv2;
  std::string name;
};

/// Default choice: the C^2 quintic smoothstep
///   phi(a) = 1/2 + (15/16) a - (5/8) a^3 + (3/16) a^5  on [-1, 1],
/// clamped to 0 below and 1 above. phi'(a) = (15/16)(1 - a^2)^2.
TransitionFunction make_quintic_transition();

}  // namespace pwsopt
