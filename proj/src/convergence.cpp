#include "pwsopt/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pwsopt/errors.hpp"

namespace pwsopt {

namespace {

// Accumulated roundoff over O(10^4)-step integrations sits a few orders
// above machine epsilon; the floor scales with the signal magnitude.
constexpr double kNoiseFloorRel = 1e-12;

void require_decay(const std::vector<double>& errors, double scale) {
  const double floor = kNoiseFloorRel * (1.0 + scale);
  const bool all_noise = std::all_of(errors.begin(), errors.end(),
                                     [floor](double e) { return e < floor; });
  if (all_noise) {
    throw InsufficientDecay("all errors at machine noise; nothing to rate-fit");
  }
}

}  // namespace

SlopeFit fit_loglog(const std::vector<double>& epsilons, const std::vector<double>& errors) {
  if (epsilons.size() != errors.size()) throw Error("fit_loglog: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (errors[i] <= 0.0) continue;
    xs.push_back(std::log(epsilons[i]));
    ys.push_back(std::log(errors[i]));
  }
  SlopeFit fit;
  fit.points_used = static_cast<int>(xs.size());
  if (fit.points_used < 2) return fit;

  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  if (vxx <= 0.0) return fit;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return fit;
}

std::vector<double> default_epsilon_schedule() {
  return {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
}

RateStudy trajectory_rate_study(const PiecewiseSmoothSystem& sys,
                                const TransitionFunction& phi, const ControlData& xi,
                                double T, const std::vector<double>& epsilons,
                                const TrajectoryStudyOptions& opts) {
  if (epsilons.empty()) throw Error("trajectory_rate_study: empty epsilon list");
  const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());

  FilippovOptions ref_opts = opts.reference;
  ref_opts.step_h = std::min({ref_opts.step_h, eps_min / 20.0, T / 2000.0});
  const Trajectory reference = integrate_filippov(sys, xi, T, ref_opts);

  RateStudy study;
  study.epsilons = epsilons;
  study.slope_window = opts.slope_window;
  for (double eps : epsilons) {
    const int n_points = gridpoints_for_epsilon(T, eps);
    ControlData fine = xi;
    fine.u = resample_hold(xi.u, n_points - 1);
    const RegularizedField field(sys, phi, eps);
    const Trajectory smooth = integrate_smooth(field, fine, T, n_points, opts.scheme);
    double err = 0.0;
    if (opts.metric == ErrorMetric::FinalState) {
      err = (smooth.final_state() - reference.final_state()).norm();
    } else {
      for (std::size_t i = 0; i < smooth.size(); ++i) {
        err = std::max(err,
                       (smooth.states[i] - reference.state_at(smooth.times[i])).norm());
      }
    }
    study.errors.push_back(err);
  }
  double state_scale = 0.0;
  for (const Vec& x : reference.states) state_scale = std::max(state_scale, x.norm());
  require_decay(study.errors, state_scale);
  const SlopeFit fit = fit_loglog(study.epsilons, study.errors);
  study.fitted_slope = fit.slope;
  study.fitted_intercept = fit.intercept;
  study.r_squared = fit.r_squared;
  study.pass = fit.points_used >= 2 && fit.slope >= opts.slope_window[0] &&
               fit.slope <= opts.slope_window[1];
  return study;
}

RateStudy derivative_rate_study(const PiecewiseSmoothSystem& sys,
                                const TransitionFunction& phi, const ControlData& xi,
                                const Direction& delta, const CostFunctional& cost,
                                double T, const std::vector<double>& epsilons,
                                const DerivativeStudyOptions& opts) {
  if (epsilons.empty()) throw Error("derivative_rate_study: empty epsilon list");

  {
    FilippovOptions sim = opts.audit_sim;
    sim.step_h = std::min(sim.step_h, T / 2000.0);
    const Trajectory traj = integrate_filippov(sys, xi, T, sim);
    const DifferentiabilityReport audit = audit_differentiability(traj, sys, opts.audit);
    if (!audit.all_ok()) {
      std::ostringstream msg;
      msg << "differentiability audit failed:";
      if (!audit.assumption2_ok) msg << " start/terminal arrival condition;";
      if (!audit.assumption3_ok) msg << " non-transversal (skimming) arrival;";
      if (!audit.assumption4_ok) msg << " arrival count above cap;";
      throw AuditFailed(msg.str());
    }
  }

  auto dl_at = [&](double eps) {
    const int n_points = gridpoints_for_epsilon(T, eps);
    ControlData fine = xi;
    fine.u = resample_hold(xi.u, n_points - 1);
    Direction dir;
    dir.dx0 = delta.dx0;
    dir.du = resample_hold(delta.du, n_points - 1);
    const RegularizedField field(sys, phi, eps);
    return directional_derivative(field, fine, dir, cost, T, n_points);
  };

  const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());
  const double reference = dl_at(eps_min / 4.0);

  RateStudy study;
  study.epsilons = epsilons;
  study.slope_window = opts.slope_window;
  for (double eps : epsilons) study.errors.push_back(std::abs(dl_at(eps) - reference));
  require_decay(study.errors, std::abs(reference));
  const SlopeFit fit = fit_loglog(study.epsilons, study.errors);
  study.fitted_slope = fit.slope;
  study.fitted_intercept = fit.intercept;
  study.r_squared = fit.r_squared;
  study.pass = fit.points_used >= 2 && fit.slope >= opts.slope_window[0] &&
               fit.slope <= opts.slope_window[1];
  return study;
}

BoundednessStudy gradient_boundedness_study(const PiecewiseSmoothSystem& sys,
                                            const TransitionFunction& phi,
                                            const ControlData& xi,
                                            const CostFunctional& cost, double T,
                                            const std::vector<double>& epsilons,
                                            const Direction& delta, double ratio_cap) {
  BoundednessStudy study;
  study.ratio_cap = ratio_cap;
  study.rows = derivative_boundedness_probe(sys, phi, xi, cost, T, epsilons, delta);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const BoundednessRow& row : study.rows) {
    lo = std::min(lo, row.grad_norm);
    hi = std::max(hi, row.grad_norm);
  }
  study.ratio = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  study.pass = study.ratio <= ratio_cap;
  return study;
}

}  // namespace pwsopt
