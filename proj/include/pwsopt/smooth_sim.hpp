#pragma once

#include "pwsopt/system.hpp"
#include "pwsopt/types.hpp"

namespace pwsopt {

enum class Scheme { Euler, RK4 };

/// Fixed-step integration of the regularized field on N gridpoints
/// (N-1 equal steps, matching the input hold grid exactly). Samples are
/// labeled D1 / D2 / SigmaBand by the sign of g against the band width.
Trajectory integrate_smooth(const RegularizedField& field, const ControlData& xi,
                            double T, int N, Scheme scheme = Scheme::Euler);

/// Final state of integrate_smooth.
Vec flow_endpoint(const RegularizedField& field, const ControlData& xi,
                  double T, int N, Scheme scheme = Scheme::Euler);

/// Smallest gridpoint count keeping the step below epsilon/10, so that
/// discretization error stays subdominant in rate studies.
int gridpoints_for_epsilon(double T, double epsilon, int min_points = 2);

}  // namespace pwsopt
