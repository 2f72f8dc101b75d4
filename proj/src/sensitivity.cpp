#include "pwsopt/sensitivity.hpp"

#include <cmath>

#include "pwsopt/errors.hpp"
#include "pwsopt/smooth_sim.hpp"

namespace pwsopt {

namespace {

// Nominal Euler pass; states has N entries.
std::vector<Vec> euler_states(const RegularizedField& field, const ControlData& xi,
                              double T, int N) {
  if (N < 2) throw Error("sensitivity: need at least two gridpoints");
  if (xi.intervals() != N - 1) throw Error("sensitivity: input grid must have N-1 intervals");
  const double h = T / static_cast<double>(N - 1);
  std::vector<Vec> states;
  states.reserve(static_cast<std::size_t>(N));
  Vec x = xi.x0;
  states.push_back(x);
  for (int k = 0; k < N - 1; ++k) {
    x += h * field.eval(x, xi.u[static_cast<std::size_t>(k)]);
    if (!x.allFinite()) throw NumericalError("sensitivity: non-finite nominal state");
    states.push_back(x);
  }
  return states;
}

}  // namespace

Direction Direction::zero(int state_dim, int input_dim, int intervals) {
  Direction d;
  d.dx0 = Vec::Zero(state_dim);
  d.du.assign(static_cast<std::size_t>(intervals), Vec::Zero(input_dim));
  return d;
}

double SensitivityBundle::grad_norm() const {
  double s = grad_x0.squaredNorm();
  for (const Vec& g : grad_u) s += g.squaredNorm();
  return std::sqrt(s);
}

double SensitivityBundle::functional_grad_norm() const {
  double s = grad_x0.squaredNorm();
  if (step > 0.0) {
    for (const Vec& g : grad_u) s += g.squaredNorm() / step;
  }
  return std::sqrt(s);
}

double SensitivityBundle::dot(const Direction& d) const {
  double s = grad_x0.dot(d.dx0);
  if (d.du.size() != grad_u.size()) throw Error("SensitivityBundle::dot: direction grid mismatch");
  for (std::size_t k = 0; k < grad_u.size(); ++k) s += grad_u[k].dot(d.du[k]);
  return s;
}

Vec forward_sensitivity(const RegularizedField& field, const ControlData& xi,
                        const Direction& delta, double T, int N) {
  const auto states = euler_states(field, xi, T, N);
  const double h = T / static_cast<double>(N - 1);
  if (static_cast<int>(delta.du.size()) != N - 1) {
    throw Error("forward_sensitivity: direction grid mismatch");
  }
  Vec dx = delta.dx0;
  for (int k = 0; k < N - 1; ++k) {
    const Vec& x = states[static_cast<std::size_t>(k)];
    const Vec& u = xi.u[static_cast<std::size_t>(k)];
    const Mat a = field.jacobian_x(x, u);
    const Mat b = field.jacobian_u(x, u);
    dx = dx + h * (a * dx) + h * (b * delta.du[static_cast<std::size_t>(k)]);
    if (!dx.allFinite()) throw NumericalError("forward_sensitivity: non-finite variation");
  }
  return dx;
}

namespace {

SensitivityBundle adjoint_pass(const RegularizedField& field, const ControlData& xi,
                               double T, int N, const std::vector<Vec>& states,
                               const Vec& terminal_costate) {
  const double h = T / static_cast<double>(N - 1);
  SensitivityBundle out;
  out.step = h;
  out.adjoint_path.assign(static_cast<std::size_t>(N), Vec());
  out.grad_u.assign(static_cast<std::size_t>(N - 1), Vec());

  Vec p = terminal_costate;
  out.adjoint_path[static_cast<std::size_t>(N - 1)] = p;
  for (int k = N - 2; k >= 0; --k) {
    const Vec& x = states[static_cast<std::size_t>(k)];
    const Vec& u = xi.u[static_cast<std::size_t>(k)];
    out.grad_u[static_cast<std::size_t>(k)] = h * (field.jacobian_u(x, u).transpose() * p);
    p = p + h * (field.jacobian_x(x, u).transpose() * p);
    if (!p.allFinite()) throw NumericalError("adjoint pass: non-finite co-state");
    out.adjoint_path[static_cast<std::size_t>(k)] = p;
  }
  out.grad_x0 = p;
  return out;
}

}  // namespace

SensitivityBundle adjoint_gradient(const RegularizedField& field, const ControlData& xi,
                                   const CostFunctional& cost, double T, int N) {
  if (cost.has_running()) {
    throw Error("adjoint_gradient: reduce the running cost with augment_running_cost first");
  }
  const auto states = euler_states(field, xi, T, N);
  SensitivityBundle out =
      adjoint_pass(field, xi, T, N, states, cost.terminal_grad(states.back()));
  out.value = cost.terminal(states.back());
  return out;
}

SensitivityBundle adjoint_seeded(const RegularizedField& field, const ControlData& xi,
                                 double T, int N, const Vec& terminal_costate) {
  const auto states = euler_states(field, xi, T, N);
  return adjoint_pass(field, xi, T, N, states, terminal_costate);
}

double directional_derivative(const RegularizedField& field, const ControlData& xi,
                              const Direction& delta, const CostFunctional& cost,
                              double T, int N) {
  return adjoint_gradient(field, xi, cost, T, N).dot(delta);
}

SensitivityBundle finite_difference_gradient(const RegularizedField& field,
                                             const ControlData& xi,
                                             const CostFunctional& cost, double T,
                                             int N, double lambda) {
  if (!(lambda > 0.0)) throw Error("finite_difference_gradient: lambda must be positive");
  auto value_at = [&](const ControlData& data) {
    return cost.terminal(euler_states(field, data, T, N).back());
  };

  SensitivityBundle out;
  out.step = T / static_cast<double>(N - 1);
  out.value = value_at(xi);
  out.grad_x0 = Vec::Zero(xi.state_dim());
  out.grad_u.assign(xi.u.size(), Vec::Zero(xi.input_dim()));

  for (int i = 0; i < xi.state_dim(); ++i) {
    const double step = lambda * std::max(1.0, std::abs(xi.x0(i)));
    ControlData plus = xi, minus = xi;
    plus.x0(i) += step;
    minus.x0(i) -= step;
    out.grad_x0(i) = (value_at(plus) - value_at(minus)) / (2.0 * step);
  }
  for (std::size_t k = 0; k < xi.u.size(); ++k) {
    for (int i = 0; i < xi.input_dim(); ++i) {
      const double step = lambda * std::max(1.0, std::abs(xi.u[k](i)));
      ControlData plus = xi, minus = xi;
      plus.u[k](i) += step;
      minus.u[k](i) -= step;
      out.grad_u[k](i) = (value_at(plus) - value_at(minus)) / (2.0 * step);
    }
  }
  return out;
}

std::pair<PiecewiseSmoothSystem, CostFunctional> augment_running_cost(
    const PiecewiseSmoothSystem& sys, const CostFunctional& cost) {
  if (!cost.has_running()) throw Error("augment_running_cost: no running term");
  const int n = sys.state_dim;
  const int m = sys.input_dim;

  auto lift_field = [n](const DynamicsFn& f, const CostFunctional& c) -> DynamicsFn {
    return [f, run = c.running, n](const Vec& x, const Vec& u) {
      const Vec head = x.head(n);
      Vec out(n + 1);
      out.head(n) = f(head, u);
      out(n) = run(head, u);
      return out;
    };
  };
  auto lift_jac_x = [n](const JacobianXFn& jac, const CostFunctional& c) -> JacobianXFn {
    return [jac, gx = c.running_grad_x, n](const Vec& x, const Vec& u) {
      const Vec head = x.head(n);
      Mat out = Mat::Zero(n + 1, n + 1);
      out.topLeftCorner(n, n) = jac(head, u);
      out.row(n).head(n) = gx(head, u).transpose();
      return out;
    };
  };
  auto lift_jac_u = [n, m](const JacobianUFn& jac, const CostFunctional& c) -> JacobianUFn {
    return [jac, gu = c.running_grad_u, n, m](const Vec& x, const Vec& u) {
      const Vec head = x.head(n);
      Mat out = Mat::Zero(n + 1, m);
      out.topRows(n) = jac(head, u);
      out.row(n) = gu(head, u).transpose();
      return out;
    };
  };

  PiecewiseSmoothSystem aug;
  aug.state_dim = n + 1;
  aug.input_dim = m;
  aug.name = sys.name.empty() ? "augmented" : sys.name + "+running";
  aug.fd_jacobians = sys.fd_jacobians;
  aug.f1 = lift_field(sys.f1, cost);
  aug.f2 = lift_field(sys.f2, cost);
  aug.jac_f1_x = lift_jac_x(sys.jac_f1_x, cost);
  aug.jac_f2_x = lift_jac_x(sys.jac_f2_x, cost);
  aug.jac_f1_u = lift_jac_u(sys.jac_f1_u, cost);
  aug.jac_f2_u = lift_jac_u(sys.jac_f2_u, cost);
  aug.guard = [g = sys.guard, n](const Vec& x) { return g(x.head(n)); };
  aug.guard_grad = [gg = sys.guard_grad, n](const Vec& x) {
    Vec out = Vec::Zero(n + 1);
    out.head(n) = gg(x.head(n));
    return out;
  };

  CostFunctional reduced;
  reduced.terminal = [t = cost.terminal, n](const Vec& x) { return t(x.head(n)) + x(n); };
  reduced.terminal_grad = [tg = cost.terminal_grad, n](const Vec& x) {
    Vec out(n + 1);
    out.head(n) = tg(x.head(n));
    out(n) = 1.0;
    return out;
  };
  return {aug, reduced};
}

Vec augment_initial_state(const Vec& x0) {
  Vec out(x0.size() + 1);
  out.head(x0.size()) = x0;
  out(x0.size()) = 0.0;
  return out;
}

std::vector<BoundednessRow> derivative_boundedness_probe(
    const PiecewiseSmoothSystem& sys, const TransitionFunction& phi,
    const ControlData& xi, const CostFunctional& cost, double T,
    const std::vector<double>& epsilons, const Direction& direction) {
  std::vector<BoundednessRow> rows;
  rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    const int n_points = gridpoints_for_epsilon(T, eps);
    ControlData fine = xi;
    fine.u = resample_hold(xi.u, n_points - 1);
    Direction dir;
    dir.dx0 = direction.dx0;
    dir.du = resample_hold(direction.du, n_points - 1);
    const RegularizedField field(sys, phi, eps);
    const SensitivityBundle bundle = adjoint_gradient(field, fine, cost, T, n_points);
    rows.push_back(BoundednessRow{eps, bundle.functional_grad_norm(), bundle.dot(dir)});
  }
  return rows;
}

}  // namespace pwsopt
