#pragma once

#include <functional>
#include <string>

#include "pwsopt/transition.hpp"
#include "pwsopt/types.hpp"

namespace pwsopt {

using DynamicsFn = std::function<Vec(const Vec&, const Vec&)>;
using JacobianXFn = std::function<Mat(const Vec&, const Vec&)>;
using JacobianUFn = std::function<Mat(const Vec&, const Vec&)>;
using GuardFn = std::function<double(const Vec&)>;
using GuardGradFn = std::function<Vec(const Vec&)>;

/// Bimodal piecewise-smooth control system: smooth fields f1 (active where
/// g < 0) and f2 (active where g > 0) separated by the zero set of the
/// guard g. Immutable after construction; all members must be pure.
struct PiecewiseSmoothSystem {
  int state_dim = 0;
  int input_dim = 0;
  DynamicsFn f1;
  DynamicsFn f2;
  GuardFn guard;
  GuardGradFn guard_grad;
  JacobianXFn jac_f1_x;
  JacobianXFn jac_f2_x;
  JacobianUFn jac_f1_u;
  JacobianUFn jac_f2_u;
  /// True when the Jacobians were synthesized by finite differences;
  /// surfaced in reports since rate studies assume exact Jacobians.
  bool fd_jacobians = false;
  std::string name;
};

/// Builds a system whose Jacobians are central finite differences of the
/// supplied fields. Flagged via fd_jacobians.
PiecewiseSmoothSystem with_fd_jacobians(int state_dim, int input_dim,
                                        DynamicsFn f1, DynamicsFn f2,
                                        GuardFn guard, std::string name = {});

struct JacobianCheckReport {
  bool ok = false;
  double max_rel_err = 0.0;
  std::string worst_entry;
};

/// Compares the supplied analytic Jacobians (including the guard gradient)
/// against central finite differences at randomly sampled points.
JacobianCheckReport check_jacobians(const PiecewiseSmoothSystem& sys,
                                    int samples = 20, unsigned seed = 12345,
                                    double rel_tol = 1e-6);

/// Smooth blend of the two fields across the band |g| < epsilon:
///   f_eps(x,u) = (1 - phi(g/eps)) f1(x,u) + phi(g/eps) f2(x,u).
/// Saturates to f1/f2 exactly (bitwise) outside the band.
class RegularizedField {
 public:
  RegularizedField(PiecewiseSmoothSystem system, TransitionFunction phi,
                   double epsilon);

  Vec eval(const Vec& x, const Vec& u) const;
  Mat jacobian_x(const Vec& x, const Vec& u) const;
  Mat jacobian_u(const Vec& x, const Vec& u) const;

  const PiecewiseSmoothSystem& system() const { return system_; }
  const TransitionFunction& phi() const { return phi_; }
  double epsilon() const { return epsilon_; }

 private:
  PiecewiseSmoothSystem system_;
  TransitionFunction phi_;
  double epsilon_;
};

}  // namespace pwsopt
