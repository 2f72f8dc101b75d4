#include "pwsopt/builtin_systems.hpp"

#include "pwsopt/errors.hpp"
#include "pwsopt/hopper.hpp"

namespace pwsopt {

namespace {

Vec scalar(double v) {
  Vec x(1);
  x(0) = v;
  return x;
}

// n-state system with additive single-channel actuation on one
// coordinate: x' = f_i(x) + e_drive u. The registry defaults run u = 0,
// where the drift matches the textbook autonomous examples exactly.
PiecewiseSmoothSystem controlled(int n, int drive, DynamicsFn f1, DynamicsFn f2,
                                 GuardFn g, GuardGradFn gg, JacobianXFn a1,
                                 JacobianXFn a2, std::string name) {
  PiecewiseSmoothSystem sys;
  sys.state_dim = n;
  sys.input_dim = 1;
  sys.f1 = [drift = std::move(f1), drive](const Vec& x, const Vec& u) {
    Vec f = drift(x, u);
    f(drive) += u(0);
    return f;
  };
  sys.f2 = [drift = std::move(f2), drive](const Vec& x, const Vec& u) {
    Vec f = drift(x, u);
    f(drive) += u(0);
    return f;
  };
  sys.guard = std::move(g);
  sys.guard_grad = std::move(gg);
  sys.jac_f1_x = std::move(a1);
  sys.jac_f2_x = std::move(a2);
  sys.jac_f1_u = [n, drive](const Vec&, const Vec&) {
    Mat b = Mat::Zero(n, 1);
    b(drive, 0) = 1.0;
    return b;
  };
  sys.jac_f2_u = sys.jac_f1_u;
  sys.name = std::move(name);
  return sys;
}

CostFunctional coordinate_cost(int n, int index) {
  CostFunctional cost;
  cost.terminal = [index](const Vec& x) { return x(index); };
  cost.terminal_grad = [n, index](const Vec&) {
    Vec g = Vec::Zero(n);
    g(index) = 1.0;
    return g;
  };
  return cost;
}

CostFunctional squared_coordinate_cost(int n, int index) {
  CostFunctional cost;
  cost.terminal = [index](const Vec& x) { return x(index) * x(index); };
  cost.terminal_grad = [n, index](const Vec& x) {
    Vec g = Vec::Zero(n);
    g(index) = 2.0 * x(index);
    return g;
  };
  return cost;
}

// Probe direction through the input channel: the sensitivity to the
// initial state of a one-dimensional constant-field system is exactly the
// saltation ratio for every epsilon (flow-box identity), so only input
// perturbations expose the epsilon-rate.
Direction input_direction(int n, int m) {
  Direction d;
  d.dx0 = Vec::Zero(n);
  d.du.assign(1, Vec::Ones(m));
  return d;
}

JacobianXFn zero_jac(int n) {
  return [n](const Vec&, const Vec&) { return Mat::Zero(n, n); };
}

GuardFn first_coordinate_guard() {
  return [](const Vec& x) { return x(0); };
}

GuardGradFn first_coordinate_grad(int n) {
  return [n](const Vec&) {
    Vec g = Vec::Zero(n);
    g(0) = 1.0;
    return g;
  };
}

}  // namespace

BuiltinProblem builtin_problem(const std::string& name) {
  BuiltinProblem p;

  if (name == "sliding1d") {
    // Both fields push into the surface; the solution reaches x = 0 at
    // t = 1 and slides (rests) there.
    p.sys = controlled(
        1, 0, [](const Vec&, const Vec&) { return scalar(1.0); },
        [](const Vec&, const Vec&) { return scalar(-1.0); }, first_coordinate_guard(),
        first_coordinate_grad(1), zero_jac(1), zero_jac(1), "sliding1d");
    p.default_T = 2.0;
    p.default_x0 = scalar(-1.0);
    p.default_cost = squared_coordinate_cost(1, 0);
    p.default_direction = input_direction(1, 1);
    p.default_x0_box = Box::uniform(1, -5.0, 5.0);
    p.default_u_box = Box::uniform(1, -10.0, 10.0);
    return p;
  }

  if (name == "crossing1d") {
    // Transversal pass-through with a speed jump from 1 to 2.
    p.sys = controlled(
        1, 0, [](const Vec&, const Vec&) { return scalar(1.0); },
        [](const Vec&, const Vec&) { return scalar(2.0); }, first_coordinate_guard(),
        first_coordinate_grad(1), zero_jac(1), zero_jac(1), "crossing1d");
    p.default_T = 1.0;
    p.default_x0 = scalar(-0.5);
    p.default_cost = coordinate_cost(1, 0);
    p.default_direction = input_direction(1, 1);
    p.default_x0_box = Box::uniform(1, -5.0, 5.0);
    p.default_u_box = Box::uniform(1, -10.0, 10.0);
    return p;
  }

  if (name == "grazing2d") {
    // x1(t) = -(t - delta)^2 / 2 under f1: the parabola touches the
    // surface tangentially at t = delta and returns, violating the
    // non-skimming arrival assumption. f2 points back down so the
    // surface classification stays well-posed at the touch.
    const double delta = 0.5;
    p.sys = controlled(
        2, 1,
        [](const Vec& x, const Vec&) {
          Vec f(2);
          f << x(1), -1.0;
          return f;
        },
        [](const Vec&, const Vec&) {
          Vec f(2);
          f << -1.0, 0.0;
          return f;
        },
        first_coordinate_guard(), first_coordinate_grad(2),
        [](const Vec&, const Vec&) {
          Mat a = Mat::Zero(2, 2);
          a(0, 1) = 1.0;
          return a;
        },
        zero_jac(2), "grazing2d");
    p.default_T = 1.5;
    p.default_x0 = (Vec(2) << -delta * delta / 2.0, delta).finished();
    p.default_cost = coordinate_cost(2, 0);
    p.default_direction = input_direction(2, 1);
    p.default_x0_box = Box::uniform(2, -5.0, 5.0);
    p.default_u_box = Box::uniform(1, -10.0, 10.0);
    return p;
  }

  if (name == "smooth1d") {
    // Degenerate check case: identical fields, so regularization has no
    // effect and rate studies report InsufficientDecay.
    auto unit = [](const Vec&, const Vec&) { return scalar(1.0); };
    p.sys = controlled(1, 0, unit, unit, first_coordinate_guard(), first_coordinate_grad(1),
                       zero_jac(1), zero_jac(1), "smooth1d");
    p.default_T = 2.0;
    p.default_x0 = scalar(-1.0);
    p.default_cost = coordinate_cost(1, 0);
    p.default_direction = input_direction(1, 1);
    p.default_x0_box = Box::uniform(1, -5.0, 5.0);
    p.default_u_box = Box::uniform(1, -10.0, 10.0);
    return p;
  }

  if (name == "hopper") {
    const HopperTask task;
    p.sys = hopper_system(HopperParams{});
    p.default_T = task.t_f;
    p.default_x0 = task.x0;
    p.default_cost = squared_coordinate_cost(4, 0);
    p.default_direction = input_direction(4, 1);
    p.default_x0_box = Box::fixed(task.x0);
    p.default_u_box = Box::uniform(1, task.u_lo, task.u_hi);
    return p;
  }

  throw ConfigError("unknown builtin system: " + name);
}

std::vector<std::string> builtin_names() {
  return {"sliding1d", "crossing1d", "grazing2d", "smooth1d", "hopper"};
}

}  // namespace pwsopt
