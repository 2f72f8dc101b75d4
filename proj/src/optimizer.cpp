#include "pwsopt/optimizer.hpp"

#include <cmath>

#include "pwsopt/errors.hpp"

namespace pwsopt {

namespace {

ControlData step_from_gradient(const ControlData& xi, const SensitivityBundle& bundle,
                               double s) {
  ControlData out = xi;
  out.x0 -= s * bundle.grad_x0;
  for (std::size_t k = 0; k < out.u.size(); ++k) out.u[k] -= s * bundle.grad_u[k];
  return out;
}

double decision_dot(const ControlData& a, const ControlData& b,
                    const SensitivityBundle& grad) {
  double s = grad.grad_x0.dot(a.x0 - b.x0);
  for (std::size_t k = 0; k < a.u.size(); ++k) s += grad.grad_u[k].dot(a.u[k] - b.u[k]);
  return s;
}

// Per-coordinate contribution to theta over the feasible shift [lo-x, hi-x];
// without bounds the shift is capped at [-1, 1].
void accumulate_theta(double g, double x, const double* lo, const double* hi,
                      double& theta, double& shift) {
  const double a = lo ? (*lo - x) : -1.0;
  const double b = hi ? (*hi - x) : 1.0;
  const double ca = g * a;
  const double cb = g * b;
  if (g == 0.0) {
    shift = 0.0;
    return;
  }
  if (ca <= cb) {
    theta += ca;
    shift = a;
  } else {
    theta += cb;
    shift = b;
  }
}

}  // namespace

const char* to_string(Termination term) {
  switch (term) {
    case Termination::ThetaTol: return "theta_tol";
    case Termination::MaxIter: return "max_iter";
    case Termination::LineSearchFail: return "line_search_fail";
  }
  return "?";
}

ControlData project(const ControlData& xi) {
  ControlData out = xi;
  if (out.x0_box) {
    if (!out.x0_box->well_ordered()) throw Error("project: x0 box is not well-ordered");
    out.x0 = out.x0_box->clamp(out.x0);
  }
  if (out.u_box) {
    if (!out.u_box->well_ordered()) throw Error("project: u box is not well-ordered");
    for (Vec& uk : out.u) uk = out.u_box->clamp(uk);
  }
  return out;
}

Objective make_terminal_objective(const RegularizedField& field,
                                  const CostFunctional& cost, double T, int N) {
  return [field, cost, T, N](const ControlData& xi) {
    return adjoint_gradient(field, xi, cost, T, N);
  };
}

OptimalityValue optimality_value_from_gradient(const ControlData& xi,
                                               const SensitivityBundle& bundle) {
  OptimalityValue out;
  out.direction.dx0 = Vec::Zero(xi.state_dim());
  out.direction.du.assign(xi.u.size(), Vec::Zero(xi.input_dim()));

  for (int i = 0; i < xi.state_dim(); ++i) {
    const double* lo = xi.x0_box ? &xi.x0_box->lo(i) : nullptr;
    const double* hi = xi.x0_box ? &xi.x0_box->hi(i) : nullptr;
    accumulate_theta(bundle.grad_x0(i), xi.x0(i), lo, hi, out.theta, out.direction.dx0(i));
  }
  for (std::size_t k = 0; k < xi.u.size(); ++k) {
    for (int i = 0; i < xi.input_dim(); ++i) {
      const double* lo = xi.u_box ? &xi.u_box->lo(i) : nullptr;
      const double* hi = xi.u_box ? &xi.u_box->hi(i) : nullptr;
      accumulate_theta(bundle.grad_u[k](i), xi.u[k](i), lo, hi, out.theta,
                       out.direction.du[k](i));
    }
  }
  return out;
}

OptimalityValue optimality_value(const RegularizedField& field, const ControlData& xi,
                                 const CostFunctional& cost, double T, int N) {
  return optimality_value_from_gradient(xi, adjoint_gradient(field, xi, cost, T, N));
}

OptimizationReport minimize(const Objective& objective, ControlData xi,
                            const SolverOptions& opts) {
  OptimizationReport report;
  xi = project(xi);
  SensitivityBundle bundle = objective(xi);
  report.cost_history.push_back(bundle.value);
  report.grad_norm_history.push_back(bundle.grad_norm());

  double trial_step = opts.initial_step;
  int iter = 0;
  for (;; ++iter) {
    const OptimalityValue theta = optimality_value_from_gradient(xi, bundle);
    report.theta_final = theta.theta;
    if (std::abs(theta.theta) <= opts.theta_tol) {
      report.termination = Termination::ThetaTol;
      break;
    }
    if (iter >= opts.max_iter) {
      report.termination = Termination::MaxIter;
      break;
    }

    double s = opts.carry_step ? trial_step : opts.initial_step;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      ControlData candidate = project(step_from_gradient(xi, bundle, s));
      const double predicted = decision_dot(xi, candidate, bundle);  // >= 0
      if (predicted <= 0.0) {
        s *= opts.backtrack_factor;
        continue;
      }
      SensitivityBundle trial = objective(candidate);
      if (trial.value <= bundle.value - opts.armijo_sigma * predicted) {
        xi = std::move(candidate);
        bundle = std::move(trial);
        report.cost_history.push_back(bundle.value);
        report.grad_norm_history.push_back(bundle.grad_norm());
        trial_step = 2.0 * s;
        accepted = true;
        break;
      }
      s *= opts.backtrack_factor;
    }
    if (!accepted) {
      report.termination = Termination::LineSearchFail;
      break;
    }
  }

  report.final_xi = std::move(xi);
  return report;
}

OptimizationReport solve_fixed_epsilon(const RegularizedField& field, const ControlData& xi,
                                       const CostFunctional& cost, double T, int N,
                                       const SolverOptions& opts) {
  OptimizationReport report = minimize(make_terminal_objective(field, cost, T, N), xi, opts);
  StageRecord stage;
  stage.epsilon = field.epsilon();
  stage.iterations = static_cast<int>(report.cost_history.size()) - 1;
  stage.termination = report.termination;
  stage.theta_final = report.theta_final;
  stage.cost_final = report.cost_history.back();
  report.stages.push_back(stage);
  return report;
}

OptimizationReport master_algorithm_core(const ObjectiveFactory& factory, ControlData xi,
                                         const std::vector<double>& schedule,
                                         const SigmaRule& sigma, const SolverOptions& opts,
                                         const AuditFn& audit) {
  if (schedule.empty()) throw Error("master_algorithm: empty epsilon schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] < schedule[i - 1]) || !(schedule[i] > 0.0)) {
      throw Error("master_algorithm: schedule must be decreasing and positive");
    }
  }

  OptimizationReport report;
  bool failed = false;
  for (double eps : schedule) {
    StageRecord stage;
    stage.epsilon = eps;
    if (failed) {
      stage.error = "skipped after earlier stage failure";
      report.stages.push_back(stage);
      continue;
    }
    SolverOptions stage_opts = opts;
    stage_opts.theta_tol = sigma ? sigma(eps) : eps;
    try {
      OptimizationReport inner = minimize(factory(eps), xi, stage_opts);
      xi = inner.final_xi;
      stage.iterations = static_cast<int>(inner.cost_history.size()) - 1;
      stage.termination = inner.termination;
      stage.theta_final = inner.theta_final;
      stage.cost_final = inner.cost_history.back();
      report.cost_history.insert(report.cost_history.end(), inner.cost_history.begin(),
                                 inner.cost_history.end());
      report.grad_norm_history.insert(report.grad_norm_history.end(),
                                      inner.grad_norm_history.begin(),
                                      inner.grad_norm_history.end());
      report.theta_final = inner.theta_final;
      report.termination = inner.termination;
    } catch (const Error& e) {
      stage.error = e.what();
      failed = true;
    }
    report.stages.push_back(stage);
  }
  report.final_xi = std::move(xi);
  if (audit && !failed) report.audit = audit(report.final_xi);
  return report;
}

OptimizationReport master_algorithm(const PiecewiseSmoothSystem& sys,
                                    const TransitionFunction& phi, const ControlData& xi,
                                    const CostFunctional& cost, double T, int N,
                                    const std::vector<double>& schedule,
                                    const SigmaRule& sigma, const SolverOptions& opts,
                                    const FilippovOptions& replay,
                                    const AuditOptions& audit_opts) {
  ObjectiveFactory factory = [&sys, &phi, &cost, T, N](double eps) {
    return make_terminal_objective(RegularizedField(sys, phi, eps), cost, T, N);
  };
  AuditFn audit = [&sys, T, replay, audit_opts](const ControlData& candidate) {
    const Trajectory traj = integrate_filippov(sys, candidate, T, replay);
    return audit_differentiability(traj, sys, audit_opts);
  };
  return master_algorithm_core(factory, xi, schedule, sigma, opts, audit);
}

}  // namespace pwsopt
