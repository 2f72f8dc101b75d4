#include "pwsopt/system.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "pwsopt/errors.hpp"

namespace pwsopt {

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite result");
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite result");
}

// Guard regularity is checked lazily: wherever the gradient of g is
// actually evaluated near the surface, it must not vanish.
void require_regular(const Vec& grad_g, double g_value, double width) {
  if (std::abs(g_value) <= width && grad_g.norm() == 0.0) {
    throw Error("guard is not regular: grad g vanishes at |g| <= " + std::to_string(width));
  }
}

Mat fd_jacobian_x(const DynamicsFn& f, const Vec& x, const Vec& u, double h) {
  const int n = static_cast<int>(x.size());
  Mat j(f(x, u).size(), n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) += step;
    xm(i) -= step;
    j.col(i) = (f(xp, u) - f(xm, u)) / (2.0 * step);
  }
  return j;
}

Mat fd_jacobian_u(const DynamicsFn& f, const Vec& x, const Vec& u, double h) {
  const int m = static_cast<int>(u.size());
  Mat j(f(x, u).size(), m);
  for (int i = 0; i < m; ++i) {
    Vec up = u, um = u;
    const double step = h * std::max(1.0, std::abs(u(i)));
    up(i) += step;
    um(i) -= step;
    j.col(i) = (f(x, up) - f(x, um)) / (2.0 * step);
  }
  return j;
}

Vec fd_guard_grad(const GuardFn& g, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Vec grad(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) += step;
    xm(i) -= step;
    grad(i) = (g(xp) - g(xm)) / (2.0 * step);
  }
  return grad;
}

}  // namespace

PiecewiseSmoothSystem with_fd_jacobians(int state_dim, int input_dim,
                                        DynamicsFn f1, DynamicsFn f2,
                                        GuardFn guard, std::string name) {
  constexpr double kStep = 1e-6;
  PiecewiseSmoothSystem sys;
  sys.state_dim = state_dim;
  sys.input_dim = input_dim;
  sys.f1 = std::move(f1);
  sys.f2 = std::move(f2);
  sys.guard = std::move(guard);
  sys.name = std::move(name);
  sys.fd_jacobians = true;
  sys.jac_f1_x = [f = sys.f1](const Vec& x, const Vec& u) { return fd_jacobian_x(f, x, u, kStep); };
  sys.jac_f2_x = [f = sys.f2](const Vec& x, const Vec& u) { return fd_jacobian_x(f, x, u, kStep); };
  sys.jac_f1_u = [f = sys.f1](const Vec& x, const Vec& u) { return fd_jacobian_u(f, x, u, kStep); };
  sys.jac_f2_u = [f = sys.f2](const Vec& x, const Vec& u) { return fd_jacobian_u(f, x, u, kStep); };
  sys.guard_grad = [g = sys.guard](const Vec& x) { return fd_guard_grad(g, x, kStep); };
  return sys;
}

JacobianCheckReport check_jacobians(const PiecewiseSmoothSystem& sys,
                                    int samples, unsigned seed, double rel_tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  JacobianCheckReport report;
  report.ok = true;

  auto compare = [&](const Mat& analytic, const Mat& numeric, const char* label) {
    const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
    const double err = (analytic - numeric).cwiseAbs().maxCoeff() / scale;
    if (err > report.max_rel_err) {
      report.max_rel_err = err;
      report.worst_entry = label;
    }
    if (err > rel_tol) report.ok = false;
  };

  for (int s = 0; s < samples; ++s) {
    Vec x(sys.state_dim), u(sys.input_dim);
    for (int i = 0; i < sys.state_dim; ++i) x(i) = dist(rng);
    for (int i = 0; i < sys.input_dim; ++i) u(i) = dist(rng);

    compare(sys.jac_f1_x(x, u), fd_jacobian_x(sys.f1, x, u, 1e-6), "jac_f1_x");
    compare(sys.jac_f2_x(x, u), fd_jacobian_x(sys.f2, x, u, 1e-6), "jac_f2_x");
    compare(sys.jac_f1_u(x, u), fd_jacobian_u(sys.f1, x, u, 1e-6), "jac_f1_u");
    compare(sys.jac_f2_u(x, u), fd_jacobian_u(sys.f2, x, u, 1e-6), "jac_f2_u");
    compare(sys.guard_grad(x), fd_guard_grad(sys.guard, x, 1e-6), "guard_grad");
  }
  return report;
}

RegularizedField::RegularizedField(PiecewiseSmoothSystem system,
                                   TransitionFunction phi, double epsilon)
    : system_(std::move(system)), phi_(std::move(phi)), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw Error("RegularizedField: epsilon must be positive");
}

Vec RegularizedField::eval(const Vec& x, const Vec& u) const {
  const double a = system_.guard(x) / epsilon_;
  if (a <= -1.0) return system_.f1(x, u);
  if (a >= 1.0) return system_.f2(x, u);
  const double w = phi_.eval(a);
  Vec v = (1.0 - w) * system_.f1(x, u) + w * system_.f2(x, u);
  require_finite(v, "RegularizedField::eval");
  return v;
}

Mat RegularizedField::jacobian_x(const Vec& x, const Vec& u) const {
  const double g = system_.guard(x);
  const double a = g / epsilon_;
  if (a <= -1.0) return system_.jac_f1_x(x, u);
  if (a >= 1.0) return system_.jac_f2_x(x, u);
  const double w = phi_.eval(a);
  const double wp = phi_.deriv(a);
  const Vec grad_g = system_.guard_grad(x);
  require_regular(grad_g, g, epsilon_);
  Mat j = (1.0 - w) * system_.jac_f1_x(x, u) + w * system_.jac_f2_x(x, u);
  if (wp != 0.0) {
    const Vec df = system_.f2(x, u) - system_.f1(x, u);
    j.noalias() += (wp / epsilon_) * df * grad_g.transpose();
  }
  require_finite(j, "RegularizedField::jacobian_x");
  return j;
}

Mat RegularizedField::jacobian_u(const Vec& x, const Vec& u) const {
  const double a = system_.guard(x) / epsilon_;
  if (a <= -1.0) return system_.jac_f1_u(x, u);
  if (a >= 1.0) return system_.jac_f2_u(x, u);
  const double w = phi_.eval(a);
  Mat j = (1.0 - w) * system_.jac_f1_u(x, u) + w * system_.jac_f2_u(x, u);
  require_finite(j, "RegularizedField::jacobian_u");
  return j;
}

}  // namespace pwsopt
