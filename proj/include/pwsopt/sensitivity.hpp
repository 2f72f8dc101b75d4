#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pwsopt/system.hpp"
#include "pwsopt/types.hpp"

namespace pwsopt {

/// Terminal cost ell(x(T)) with analytic gradient. A running term, when
/// present, is folded into terminal form through augment_running_cost.
struct CostFunctional {
  std::function<double(const Vec&)> terminal;
  std::function<Vec(const Vec&)> terminal_grad;
  std::function<double(const Vec&, const Vec&)> running;
  std::function<Vec(const Vec&, const Vec&)> running_grad_x;
  std::function<Vec(const Vec&, const Vec&)> running_grad_u;

  bool has_running() const { return static_cast<bool>(running); }
};

/// Tangent direction (dx0, du) over the decision data.
struct Direction {
  Vec dx0;
  std::vector<Vec> du;

  static Direction zero(int state_dim, int input_dim, int intervals);
};

/// Value and derivatives of the discrete cost at one decision point.
/// All derivatives are exact derivatives of the Euler discretization.
struct SensitivityBundle {
  double value = 0.0;
  Vec grad_x0;
  std::vector<Vec> grad_u;          // per hold interval, h * B_k^T p_{k+1}
  std::vector<Vec> adjoint_path;    // p_k per gridpoint
  std::optional<double> directional;
  double step = 0.0;                // grid step h the gradients belong to

  /// Euclidean norm of the stacked (grad_x0, grad_u) vector.
  double grad_norm() const;
  /// Grid-independent norm: u-part measured in the L2 sense, so values
  /// are comparable across refinements.
  double functional_grad_norm() const;
  double dot(const Direction& d) const;
};

/// Propagates the exact differential of the Euler map along the nominal
/// trajectory: dx_{k+1} = (I + h A_k) dx_k + h B_k du_k. Returns dx_N.
Vec forward_sensitivity(const RegularizedField& field, const ControlData& xi,
                        const Direction& delta, double T, int N);

/// Backward recursion p_k = (I + h A_k)^T p_{k+1}, p_N = grad ell(x_N);
/// exact transpose of the forward discrete map.
SensitivityBundle adjoint_gradient(const RegularizedField& field, const ControlData& xi,
                                   const CostFunctional& cost, double T, int N);

/// <adjoint gradient, delta>.
double directional_derivative(const RegularizedField& field, const ControlData& xi,
                              const Direction& delta, const CostFunctional& cost,
                              double T, int N);

/// Adjoint recursion from an arbitrary terminal co-state; building block
/// for costs charged at interior gridpoints. value is left at zero.
SensitivityBundle adjoint_seeded(const RegularizedField& field, const ControlData& xi,
                                 double T, int N, const Vec& terminal_costate);

/// Central differences per coordinate of (x0, u-grid); validation oracle.
SensitivityBundle finite_difference_gradient(const RegularizedField& field,
                                             const ControlData& xi,
                                             const CostFunctional& cost, double T,
                                             int N, double lambda = 1e-5);

/// Reduces a running cost to terminal form: appends an accumulator state
/// with dynamics w' = running(x, u) to both fields and adds w(T) to the
/// terminal cost. Returns the augmented system and cost.
std::pair<PiecewiseSmoothSystem, CostFunctional> augment_running_cost(
    const PiecewiseSmoothSystem& sys, const CostFunctional& cost);

/// Extends an initial state with a zero accumulator coordinate.
Vec augment_initial_state(const Vec& x0);

struct BoundednessRow {
  double epsilon = 0.0;
  double grad_norm = 0.0;  // functional norm
  double dl_value = 0.0;   // DL^eps along the probe direction
};

/// Gradient norms of the regularized cost over a list of epsilons, each
/// integrated on a grid fine enough that the Euler error stays
/// subdominant (h <= eps/10).
std::vector<BoundednessRow> derivative_boundedness_probe(
    const PiecewiseSmoothSystem& sys, const TransitionFunction& phi,
    const ControlData& xi, const CostFunctional& cost, double T,
    const std::vector<double>& epsilons, const Direction& direction);

}  // namespace pwsopt
