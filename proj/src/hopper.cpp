#include "pwsopt/hopper.hpp"

#include <cmath>

#include "pwsopt/errors.hpp"
#include "pwsopt/smooth_sim.hpp"
#include "pwsopt/transition.hpp"

namespace pwsopt {

PiecewiseSmoothSystem hopper_system(const HopperParams& params) {
  if (!(params.m > 0.0) || !(params.k0 > 0.0) || params.d0 < 0.0 ||
      !(params.leg_ref > 0.0) || params.travel < 0.0) {
    throw Error("hopper_system: need m > 0, k0 > 0, d0 >= 0, leg_ref > 0, travel >= 0");
  }
  const double m = params.m;
  const double k0 = params.k0;
  const double d0 = params.d0;
  const double grav = params.gravity;
  const double l_ref = params.leg_ref;
  const double travel = params.travel;

  // Engagement factor and its L-derivative.
  const auto engagement = [l_ref, travel](double leg) {
    if (travel == 0.0) return std::pair<double, double>{1.0, 0.0};
    const double s = (leg - l_ref) / travel;
    const double s2 = s * s;
    const double denom = 1.0 + s2 * s2;
    const double e = 1.0 / denom;
    const double de = -4.0 * s2 * s / travel * e * e;
    return std::pair<double, double>{e, de};
  };

  PiecewiseSmoothSystem sys;
  sys.state_dim = 4;
  sys.input_dim = 1;
  sys.name = "hopper";

  // Ground: leg force F = K(L)(L - z) + D(L)(Ldot - zdot) acts on the mass,
  // with K = k0 e(L), D = d0 e(L).
  sys.f1 = [m, k0, d0, grav, engagement](const Vec& x, const Vec& u) {
    const double e = engagement(x(2)).first;
    const double force = k0 * e * (x(2) - x(0)) + d0 * e * (x(3) - x(1));
    Vec out(4);
    out << x(1), force / m - grav, x(3), u(0);
    return out;
  };
  // Flight: ballistic mass, leg integrates the input.
  sys.f2 = [grav](const Vec& x, const Vec& u) {
    Vec out(4);
    out << x(1), -grav, x(3), u(0);
    return out;
  };
  sys.guard = [](const Vec& x) { return x(0) - x(2); };
  sys.guard_grad = [](const Vec&) {
    Vec g(4);
    g << 1.0, 0.0, -1.0, 0.0;
    return g;
  };
  sys.jac_f1_x = [m, k0, d0, engagement](const Vec& x, const Vec&) {
    const auto [e, de] = engagement(x(2));
    const double k = k0 * e;
    const double d = d0 * e;
    Mat a = Mat::Zero(4, 4);
    a(0, 1) = 1.0;
    a(1, 0) = -k / m;
    a(1, 1) = -d / m;
    a(1, 2) = (k + de * (k0 * (x(2) - x(0)) + d0 * (x(3) - x(1)))) / m;
    a(1, 3) = d / m;
    a(2, 3) = 1.0;
    return a;
  };
  sys.jac_f2_x = [](const Vec&, const Vec&) {
    Mat a = Mat::Zero(4, 4);
    a(0, 1) = 1.0;
    a(2, 3) = 1.0;
    return a;
  };
  sys.jac_f1_u = [](const Vec&, const Vec&) {
    Mat b = Mat::Zero(4, 1);
    b(3, 0) = 1.0;
    return b;
  };
  sys.jac_f2_u = sys.jac_f1_u;
  return sys;
}

HopperCost hopper_cost(const HopperTask& task) {
  if (!(task.t_apex < task.t_f)) throw Error("hopper_cost: need t_apex < t_f");
  HopperCost cost;
  cost.task = task;

  const double z_apex = task.z_apex;
  cost.apex_cost.terminal = [z_apex](const Vec& x) {
    const double dz = x(0) - z_apex;
    return dz * dz + x(1) * x(1);
  };
  cost.apex_cost.terminal_grad = [z_apex](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(0) = 2.0 * (x(0) - z_apex);
    g(1) = 2.0 * x(1);
    return g;
  };

  const double z_home = task.x0(0);
  cost.settle_cost.terminal = [z_home](const Vec& x) {
    const double dz = x(0) - z_home;
    return dz * dz + x(1) * x(1) + x(4);
  };
  cost.settle_cost.terminal_grad = [z_home](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(0) = 2.0 * (x(0) - z_home);
    g(1) = 2.0 * x(1);
    g(4) = 1.0;
    return g;
  };
  return cost;
}

int apex_grid_index(const HopperTask& task, int N) {
  const double h = task.t_f / static_cast<double>(N - 1);
  const int idx = static_cast<int>(std::lround(task.t_apex / h));
  if (idx <= 0 || idx >= N - 1 ||
      std::abs(static_cast<double>(idx) * h - task.t_apex) > 1e-9 * task.t_f) {
    throw TaskInfeasibleGrid("t_apex does not land on the integration grid");
  }
  return idx;
}

SensitivityBundle evaluate_hopper_objective(const RegularizedField& aug_field,
                                            const HopperCost& cost,
                                            const ControlData& xi, int N) {
  const HopperTask& task = cost.task;
  const double T = task.t_f;
  const int ia = apex_grid_index(task, N);
  const double h = T / static_cast<double>(N - 1);
  const double t_apex = h * static_cast<double>(ia);

  ControlData stage_a;
  stage_a.x0 = xi.x0;
  stage_a.u.assign(xi.u.begin(), xi.u.begin() + ia);
  const Trajectory traj_a = integrate_smooth(aug_field, stage_a, t_apex, ia + 1);

  ControlData stage_b;
  stage_b.x0 = traj_a.final_state();
  stage_b.u.assign(xi.u.begin() + ia, xi.u.end());
  const int nb = N - ia;
  const SensitivityBundle tail =
      adjoint_gradient(aug_field, stage_b, cost.settle_cost, T - t_apex, nb);

  // Chain rule through the apex gridpoint: the settle adjoint arrives as
  // the sensitivity of the tail cost to the apex state; the apex residual
  // adds its own gradient there.
  const Vec seed = tail.grad_x0 + cost.apex_cost.terminal_grad(traj_a.final_state());
  const SensitivityBundle head = adjoint_seeded(aug_field, stage_a, t_apex, ia + 1, seed);

  SensitivityBundle out;
  out.step = h;
  out.value = cost.apex_cost.terminal(traj_a.final_state()) + tail.value;
  out.grad_x0 = head.grad_x0;
  out.grad_u.reserve(xi.u.size());
  out.grad_u.insert(out.grad_u.end(), head.grad_u.begin(), head.grad_u.end());
  out.grad_u.insert(out.grad_u.end(), tail.grad_u.begin(), tail.grad_u.end());
  return out;
}

std::vector<Phase> extract_phases(const Trajectory& traj) {
  std::vector<Phase> phases;
  const std::size_t n = traj.size();
  auto effective = [&](std::size_t i) -> ModeLabel {
    ModeLabel m = traj.modes[i];
    if (m == ModeLabel::CrossingSigma) {
      // Instantaneous boundary sample; attach to the departure side.
      for (std::size_t j = i + 1; j < n; ++j) {
        if (traj.modes[j] != ModeLabel::CrossingSigma) return traj.modes[j];
      }
      for (std::size_t j = i; j-- > 0;) {
        if (traj.modes[j] != ModeLabel::CrossingSigma) return traj.modes[j];
      }
    }
    return m;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const ModeLabel m = effective(i);
    if (phases.empty() || phases.back().mode != m) {
      if (!phases.empty()) phases.back().t_end = traj.times[i];
      phases.push_back(Phase{m, traj.times[i], traj.times[i]});
    }
  }
  if (!phases.empty()) phases.back().t_end = traj.times.back();
  return phases;
}

int count_flight_phases_before(const std::vector<Phase>& phases, double t) {
  int count = 0;
  for (const Phase& p : phases) {
    if (p.mode == ModeLabel::D2 && p.t_start < t) ++count;
  }
  return count;
}

HopperRunResult optimize_hopping(const HopperTask& task, const HopperParams& params,
                                 const HopperRunOptions& opts) {
  const int N = opts.gridpoints;
  (void)apex_grid_index(task, N);  // validate before any work

  const PiecewiseSmoothSystem sys = hopper_system(params);
  const HopperCost cost = hopper_cost(task);

  // Effort accumulator state: w' = effort_weight * u^2.
  CostFunctional effort;
  const double w_eff = task.effort_weight;
  effort.terminal = [](const Vec&) { return 0.0; };
  effort.terminal_grad = [](const Vec& x) { return Vec::Zero(x.size()); };
  effort.running = [w_eff](const Vec&, const Vec& u) { return w_eff * u.squaredNorm(); };
  effort.running_grad_x = [](const Vec& x, const Vec&) { return Vec::Zero(x.size()); };
  effort.running_grad_u = [w_eff](const Vec&, const Vec& u) { return Vec(2.0 * w_eff * u); };
  const PiecewiseSmoothSystem aug = augment_running_cost(sys, effort).first;

  const TransitionFunction phi = make_quintic_transition();

  ControlData xi;
  xi.x0 = augment_initial_state(task.x0);
  if (opts.initial_u.empty()) {
    xi.u.assign(static_cast<std::size_t>(N - 1), Vec::Zero(1));
  } else {
    if (static_cast<int>(opts.initial_u.size()) != N - 1) {
      throw Error("optimize_hopping: seed input grid must have N-1 intervals");
    }
    xi.u = opts.initial_u;
  }
  xi.x0_box = Box::fixed(xi.x0);  // the experiment optimizes the input only
  xi.u_box = Box::uniform(1, task.u_lo, task.u_hi);

  ObjectiveFactory factory = [&aug, &phi, &cost, N](double eps) -> Objective {
    RegularizedField field(aug, phi, eps);
    return [field, cost, N](const ControlData& data) {
      return evaluate_hopper_objective(field, cost, data, N);
    };
  };

  HopperRunResult result;
  result.report =
      master_algorithm_core(factory, xi, opts.schedule, /*sigma=*/{}, opts.solver, {});

  // Smoothed trajectory of the final stage and the true-dynamics replay.
  const double eps_final = opts.schedule.back();
  ControlData plain = result.report.final_xi;
  plain.x0 = task.x0;
  plain.x0_box.reset();
  plain.u_box.reset();
  const RegularizedField field4(sys, phi, eps_final);
  result.smooth = integrate_smooth(field4, plain, task.t_f, N);

  FilippovOptions replay_opts = opts.replay;
  replay_opts.step_h = std::min(replay_opts.step_h, task.t_f / (4.0 * (N - 1)));
  result.replay = integrate_filippov(sys, plain, task.t_f, replay_opts);
  result.report.audit = audit_differentiability(result.replay, sys, opts.audit);

  result.phases = extract_phases(result.replay);
  result.flight_phases_before_apex = count_flight_phases_before(result.phases, task.t_apex);
  return result;
}

}  // namespace pwsopt
