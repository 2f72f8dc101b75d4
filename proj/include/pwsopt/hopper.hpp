#pragma once

#include <vector>

#include "pwsopt/optimizer.hpp"
#include "pwsopt/sensitivity.hpp"
#include "pwsopt/system.hpp"

namespace pwsopt {

/// Actuated spring-mass hopper. The leg-spring coefficient curves are
///   K(L) = k0 e(L),   D(L) = d0 e(L),
/// with the smooth engagement factor e(L) = 1/(1 + ((L - leg_ref)/travel)^4).
/// travel = 0 disables the falloff (constant coefficients, the default);
/// either way the defaults make the nominal stance a static equilibrium.
///
/// With finite travel the leg cannot hold the mass statically much above
/// stance height, so apex targets are reachable only ballistically; the
/// contact-implicit experiment preset uses travel = 0.06, d0 = 1.
struct HopperParams {
  double m = 1.0;         // kg
  double k0 = 98.1;       // N/m at L = leg_ref
  double d0 = 2.0;        // N s/m at L = leg_ref
  double gravity = 9.81;  // m/s^2
  double travel = 0.0;    // m, engagement falloff scale; 0 = constant
  double leg_ref = 0.75;  // m, transmission reference length
};

/// Parameters of the shipped contact-implicit experiment.
inline HopperParams hopper_experiment_params() {
  HopperParams p;
  p.travel = 0.06;
  p.d0 = 1.0;
  return p;
}

/// States (z, zdot, L, Ldot): mass height, its rate, natural leg-spring
/// length, its rate. Input u drives Lddot. Guard g = z - L: flight above
/// (leg unloaded), ground contact below (spring compressed).
PiecewiseSmoothSystem hopper_system(const HopperParams& params = {});

struct HopperTask {
  double z_apex = 1.0;
  double t_apex = 1.0;
  double t_f = 1.8;
  Vec x0 = (Vec(4) << 0.65, 0.0, 0.75, 0.0).finished();
  double u_lo = -10.0;
  double u_hi = 10.0;
  double effort_weight = 1.0;
};

/// Cost pieces over the effort-augmented 5-state (z, zdot, L, Ldot, w)
/// with w' = effort_weight * u^2. The apex residual is charged at the
/// t_apex gridpoint by splitting the horizon into two chained solves.
struct HopperCost {
  HopperTask task;
  CostFunctional apex_cost;    // (z - z_apex)^2 + zdot^2
  CostFunctional settle_cost;  // (z - z(0))^2 + zdot^2 + w
};

HopperCost hopper_cost(const HopperTask& task);

/// Gridpoint index of t_apex; throws TaskInfeasibleGrid when t_apex does
/// not land on the grid.
int apex_grid_index(const HopperTask& task, int N);

/// Cost and exact gradient of the chained two-stage discrete problem.
SensitivityBundle evaluate_hopper_objective(const RegularizedField& aug_field,
                                            const HopperCost& cost,
                                            const ControlData& xi, int N);

/// Maximal constant-mode intervals of a trajectory. Surface samples are
/// attached to the following interior run; sliding stretches stand alone.
struct Phase {
  ModeLabel mode = ModeLabel::D1;
  double t_start = 0.0;
  double t_end = 0.0;
};

std::vector<Phase> extract_phases(const Trajectory& traj);
int count_flight_phases_before(const std::vector<Phase>& phases, double t);

struct HopperRunOptions {
  int gridpoints = 181;  // puts t_apex exactly on the grid
  std::vector<double> schedule{0.04, 0.02, 0.01};
  std::vector<Vec> initial_u;  // seed input; zeros when empty
  SolverOptions solver;
  FilippovOptions replay;
  AuditOptions audit;

  HopperRunOptions() {
    solver.max_iter = 4000;
    solver.carry_step = true;
  }
};

struct HopperRunResult {
  OptimizationReport report;
  Trajectory smooth;   // 4-state trajectory of the final-epsilon field
  Trajectory replay;   // Filippov replay of the optimized input
  std::vector<Phase> phases;
  int flight_phases_before_apex = 0;
};

/// End-to-end contact-implicit experiment: epsilon-reduction optimization
/// from rest with the initial state frozen, then a replay of the optimized
/// input through the discontinuous dynamics.
HopperRunResult optimize_hopping(const HopperTask& task, const HopperParams& params,
                                 const HopperRunOptions& opts = {});

}  // namespace pwsopt
