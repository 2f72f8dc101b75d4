#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pwsopt/filippov.hpp"
#include "pwsopt/sensitivity.hpp"
#include "pwsopt/system.hpp"
#include "pwsopt/types.hpp"

namespace pwsopt {

struct SolverOptions {
  double theta_tol = 1e-6;
  int max_iter = 500;
  double armijo_sigma = 1e-4;     // sufficient-decrease fraction
  double backtrack_factor = 0.5;  // step shrink per backtrack
  double initial_step = 1.0;
  int max_backtracks = 60;
  /// Start each line search from double the last accepted step instead of
  /// initial_step. Helps long gradient descents; off by default.
  bool carry_step = false;
};

enum class Termination { ThetaTol, MaxIter, LineSearchFail };
const char* to_string(Termination term);

/// theta = inf over feasible shifts of the directional derivative; always
/// <= 0, zero exactly when no feasible descent direction exists.
struct OptimalityValue {
  double theta = 0.0;
  Direction direction;  // minimizing shift (a box vertex componentwise)
};

struct StageRecord {
  double epsilon = 0.0;
  int iterations = 0;
  Termination termination = Termination::MaxIter;
  double theta_final = 0.0;
  double cost_final = 0.0;
  std::string error;  // non-empty when the stage aborted
};

struct OptimizationReport {
  ControlData final_xi;
  std::vector<double> cost_history;       // per accepted iterate, non-increasing
  std::vector<double> grad_norm_history;
  double theta_final = 0.0;
  Termination termination = Termination::MaxIter;
  std::vector<StageRecord> stages;        // one per epsilon for master runs
  std::optional<DifferentiabilityReport> audit;
};

/// Componentwise clamp onto the data's boxes (identity without boxes).
ControlData project(const ControlData& xi);

/// Whole-problem evaluation: value plus exact gradients at a point.
using Objective = std::function<SensitivityBundle(const ControlData&)>;

/// Objective for the plain terminal-cost problem over the Euler flow.
Objective make_terminal_objective(const RegularizedField& field,
                                  const CostFunctional& cost, double T, int N);

/// theta from an already-computed gradient. The infimum decomposes per
/// coordinate over the shifted box; coordinates without a box are capped
/// at unit sup-norm shifts.
OptimalityValue optimality_value_from_gradient(const ControlData& xi,
                                               const SensitivityBundle& bundle);

OptimalityValue optimality_value(const RegularizedField& field, const ControlData& xi,
                                 const CostFunctional& cost, double T, int N);

/// Projected gradient descent with Armijo backtracking on an arbitrary
/// objective. Every iterate stays inside the boxes.
OptimizationReport minimize(const Objective& objective, ControlData xi,
                            const SolverOptions& opts);

OptimizationReport solve_fixed_epsilon(const RegularizedField& field, const ControlData& xi,
                                       const CostFunctional& cost, double T, int N,
                                       const SolverOptions& opts = {});

using SigmaRule = std::function<double(double)>;
using ObjectiveFactory = std::function<Objective(double epsilon)>;
using AuditFn = std::function<DifferentiabilityReport(const ControlData&)>;

/// Epsilon-reduction master loop: each stage solves to |theta| <= sigma(eps)
/// (or the iteration cap), warm-starting from the previous stage. The
/// optional audit runs on the final iterate.
OptimizationReport master_algorithm_core(const ObjectiveFactory& factory, ControlData xi,
                                         const std::vector<double>& schedule,
                                         const SigmaRule& sigma, const SolverOptions& opts,
                                         const AuditFn& audit = {});

/// Master loop for the plain terminal-cost problem; audits the final
/// iterate against the true discontinuous dynamics.
OptimizationReport master_algorithm(const PiecewiseSmoothSystem& sys,
                                    const TransitionFunction& phi, const ControlData& xi,
                                    const CostFunctional& cost, double T, int N,
                                    const std::vector<double>& schedule,
                                    const SigmaRule& sigma = {},
                                    const SolverOptions& opts = {},
                                    const FilippovOptions& replay = {},
                                    const AuditOptions& audit_opts = {});

}  // namespace pwsopt
