#pragma once

#include <string>
#include <vector>

#include "pwsopt/sensitivity.hpp"
#include "pwsopt/system.hpp"

namespace pwsopt {

/// Registered example system with runnable defaults for the CLI and the
/// test harnesses. Custom systems enter through the library API; the
/// registry keeps the guard-regularity and Jacobian requirements honest.
struct BuiltinProblem {
  PiecewiseSmoothSystem sys;
  double default_T = 1.0;
  Vec default_x0;
  Box default_x0_box;
  Box default_u_box;
  CostFunctional default_cost;
  Direction default_direction;  // one hold interval
};

/// Names: sliding1d, crossing1d, grazing2d, smooth1d, hopper.
BuiltinProblem builtin_problem(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace pwsopt
