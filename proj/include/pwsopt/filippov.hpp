#pragma once

#include "pwsopt/system.hpp"
#include "pwsopt/types.hpp"

namespace pwsopt {

struct LiePair {
  double lf1 = 0.0;  // grad g . f1
  double lf2 = 0.0;  // grad g . f2
};

/// Lie derivatives of the guard along both fields at (x, u).
LiePair lie_derivatives(const PiecewiseSmoothSystem& sys, const Vec& x, const Vec& u);

/// Region classification. Throws TransversalityViolation at surface points
/// where both fields point away from the surface.
ModeLabel classify(const PiecewiseSmoothSystem& sys, const Vec& x, const Vec& u,
                   double guard_tol);

/// Filippov sliding vector field (1-a) f1 + a f2 with
/// a = (grad g . f1) / (grad g . (f1 - f2)). Requires a sliding point.
Vec sliding_field(const PiecewiseSmoothSystem& sys, const Vec& x, const Vec& u);

struct FilippovOptions {
  double step_h = 1e-3;
  double guard_tol = 1e-10;  // double-precision bisection floor
  int bisection_cap = 80;
  int event_cap = 1000;      // beyond this, Zeno behavior is suspected
};

/// Reference integrator for the discontinuous dynamics under Filippov's
/// convention. Fixed-step RK4 in the interior, events localized by
/// bisection, sliding integrated in the ambient space with per-stage
/// projection onto g = 0 along grad g. Inputs are zero-order-hold; hold
/// boundaries are always sample points, event times are inserted.
Trajectory integrate_filippov(const PiecewiseSmoothSystem& sys, const ControlData& xi,
                              double T, const FilippovOptions& opts = {});

struct DifferentiabilityReport {
  std::vector<double> arrival_times;  // instants where the solution reaches the surface
  bool assumption2_ok = true;         // x0 off the surface and no arrival at T
  bool assumption3_ok = true;         // every arrival transversal over a window
  bool assumption4_ok = true;         // finitely many arrivals (configured cap)
  std::vector<double> transversality_margins;  // per arrival, signed
  bool exit_at_final_time = false;    // sliding exit recorded at exactly T (flagged, not classified)
  bool all_ok() const { return assumption2_ok && assumption3_ok && assumption4_ok; }
};

struct AuditOptions {
  double window_gamma = 1e-2;  // half-width of the transversality window, seconds
  double skim_tol = 1e-6;      // interior |g| minima below this count as tangential arrivals
  int arrival_cap = 1000;
  double guard_tol = 1e-10;
};

/// Checks the differentiability assumptions along a Filippov trajectory:
/// start off the surface, no arrival at the final time, transversal
/// (non-skimming) arrivals, finitely many events. Tangential touches that
/// the event detector cannot see are picked up by scanning interior local
/// minima of |g|.
DifferentiabilityReport audit_differentiability(const Trajectory& traj,
                                                const PiecewiseSmoothSystem& sys,
                                                const AuditOptions& opts = {});

}  // namespace pwsopt
