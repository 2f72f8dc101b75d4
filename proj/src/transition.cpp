#include "pwsopt/transition.hpp"

namespace pwsopt {

TransitionFunction make_quintic_transition() {
  TransitionFunction phi;
  phi.name = "quintic";
  phi.eval = [](double a) {
    if (a <= -1.0) return 0.0;
    if (a >= 1.0) return 1.0;
    const double a2 = a * a;
    return 0.5 + a * (15.0 / 16.0 + a2 * (-5.0 / 8.0 + a2 * (3.0 / 16.0)));
  };
  phi.deriv = [](double a) {
    if (a <= -1.0 || a >= 1.0) return 0.0;
    const double s = 1.0 - a * a;
    return 15.0 / 16.0 * s * s;
  };
  phi.deriv2 = [](double a) {
    if (a <= -1.0 || a >= 1.0) return 0.0;
    return 15.0 / 4.0 * a * (a * a - 1.0);
  };
  return phi;
}

}  // namespace pwsopt
