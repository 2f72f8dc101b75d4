#pragma once

#include <array>
#include <vector>

#include "pwsopt/filippov.hpp"
#include "pwsopt/sensitivity.hpp"
#include "pwsopt/smooth_sim.hpp"
#include "pwsopt/system.hpp"

namespace pwsopt {

/// Least-squares line through (log eps, log err); zero errors excluded.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

SlopeFit fit_loglog(const std::vector<double>& epsilons, const std::vector<double>& errors);

/// Geometric default schedule 10^-1 .. 10^-3, half-decade spacing.
std::vector<double> default_epsilon_schedule();

enum class ErrorMetric {
  MaxOverTime,  // sup_t ||x_eps(t) - x_fil(t)||, the quantity the linear
                // rate bounds; insensitive to error cancellation at T
  FinalState,   // ||x_eps(T) - x_fil(T)||
};

struct RateStudy {
  std::vector<double> epsilons;
  std::vector<double> errors;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double r_squared = 0.0;
  std::array<double, 2> slope_window{0.8, 1.2};
  bool pass = false;
};

struct TrajectoryStudyOptions {
  std::array<double, 2> slope_window{0.8, 1.2};
  ErrorMetric metric = ErrorMetric::MaxOverTime;
  Scheme scheme = Scheme::RK4;
  FilippovOptions reference;  // step_h tightened automatically below eps_min/20
};

/// Trajectory convergence of the regularized flow to the Filippov flow.
/// Per epsilon the grid keeps h <= eps/10. Throws InsufficientDecay when
/// every error sits at machine noise.
RateStudy trajectory_rate_study(const PiecewiseSmoothSystem& sys,
                                const TransitionFunction& phi, const ControlData& xi,
                                double T, const std::vector<double>& epsilons,
                                const TrajectoryStudyOptions& opts = {});

struct DerivativeStudyOptions {
  std::array<double, 2> slope_window{0.8, 1.2};
  FilippovOptions audit_sim;
  AuditOptions audit;
};

/// Cauchy rate of DL^eps against the Richardson surrogate DL^{eps_min/4}.
/// The data must pass the differentiability audit first (AuditFailed
/// otherwise); the surrogate stands in for the true non-smooth derivative,
/// which has no closed form here.
RateStudy derivative_rate_study(const PiecewiseSmoothSystem& sys,
                                const TransitionFunction& phi, const ControlData& xi,
                                const Direction& delta, const CostFunctional& cost,
                                double T, const std::vector<double>& epsilons,
                                const DerivativeStudyOptions& opts = {});

struct BoundednessStudy {
  std::vector<BoundednessRow> rows;
  double ratio = 1.0;  // max / min gradient norm
  double ratio_cap = 10.0;
  bool pass = false;
};

/// Gradient-norm boundedness across an epsilon sweep.
BoundednessStudy gradient_boundedness_study(const PiecewiseSmoothSystem& sys,
                                            const TransitionFunction& phi,
                                            const ControlData& xi,
                                            const CostFunctional& cost, double T,
                                            const std::vector<double>& epsilons,
                                            const Direction& delta,
                                            double ratio_cap = 10.0);

}  // namespace pwsopt
