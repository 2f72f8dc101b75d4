#include "pwsopt/filippov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pwsopt/errors.hpp"

namespace pwsopt {

namespace {

constexpr double kDegenerateTol = 1e-12;

Vec rk4_step(const DynamicsFn& f, const Vec& x, const Vec& u, double dt) {
  const Vec k1 = f(x, u);
  const Vec k2 = f(x + 0.5 * dt * k1, u);
  const Vec k3 = f(x + 0.5 * dt * k2, u);
  const Vec k4 = f(x + dt * k3, u);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Newton projection onto g = 0 along grad g.
Vec project_to_surface(const PiecewiseSmoothSystem& sys, Vec x, double tol) {
  for (int it = 0; it < 5; ++it) {
    const double g = sys.guard(x);
    if (std::abs(g) <= tol) return x;
    const Vec grad = sys.guard_grad(x);
    const double n2 = grad.squaredNorm();
    if (n2 == 0.0) throw Error("guard is not regular: grad g vanishes on the surface");
    x -= (g / n2) * grad;
  }
  if (std::abs(sys.guard(x)) > 10.0 * tol) {
    throw NumericalError("surface projection did not converge");
  }
  return x;
}

enum class Regime { Interior1, Interior2, Sliding };

struct Recorder {
  Trajectory traj;
  double time_eps;

  void push(double t, const Vec& x, double g, ModeLabel mode, const Vec& u_segment) {
    if (!traj.times.empty() && t <= traj.times.back() + time_eps) {
      // Event landed on an existing sample time: keep one row, refresh it.
      traj.states.back() = x;
      traj.guard_values.back() = g;
      traj.modes.back() = mode;
      return;
    }
    if (!traj.times.empty()) traj.inputs.push_back(u_segment);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.guard_values.push_back(g);
    traj.modes.push_back(mode);
  }
};

}  // namespace

LiePair lie_derivatives(const PiecewiseSmoothSystem& sys, const Vec& x, const Vec& u) {
  const Vec grad = sys.guard_grad(x);
  return LiePair{grad.dot(sys.f1(x, u)), grad.dot(sys.f2(x, u))};
}

ModeLabel classify(const PiecewiseSmoothSystem& sys, const Vec& x, const Vec& u,
                   double guard_tol) {
  const double g = sys.guard(x);
  if (g < -guard_tol) return ModeLabel::D1;
  if (g > guard_tol) return ModeLabel::D2;
  const LiePair lie = lie_derivatives(sys, x, u);
  if (lie.lf1 > 0.0 && lie.lf2 < 0.0) return ModeLabel::SlidingOnSigma;
  if (lie.lf1 <= 0.0 && lie.lf2 >= 0.0) {
    throw TransversalityViolation("both fields point away from the surface (L_f1 g <= 0, L_f2 g >= 0)");
  }
  return ModeLabel::CrossingSigma;
}

Vec sliding_field(const PiecewiseSmoothSystem& sys, const Vec& x, const Vec& u) {
  const Vec grad = sys.guard_grad(x);
  const Vec v1 = sys.f1(x, u);
  const Vec v2 = sys.f2(x, u);
  const double denom = grad.dot(v1 - v2);
  if (std::abs(denom) < kDegenerateTol) {
    throw DegenerateSliding("sliding coefficient undefined: grad g . (f1 - f2) ~ 0");
  }
  const double alpha = grad.dot(v1) / denom;
  return (1.0 - alpha) * v1 + alpha * v2;
}

Trajectory integrate_filippov(const PiecewiseSmoothSystem& sys, const ControlData& xi,
                              double T, const FilippovOptions& opts) {
  if (!xi.x0.allFinite()) throw NumericalError("integrate_filippov: non-finite x0");
  if (xi.u.empty()) throw Error("integrate_filippov: input grid does not cover [0,T]");
  if (!(T > 0.0)) throw Error("integrate_filippov: T must be positive");
  const double tol = opts.guard_tol;
  const double time_eps = 1e-13 * std::max(1.0, T);

  // Nominal mesh: every input-hold boundary, subdivided by step_h.
  std::vector<double> mesh;
  const int K = xi.intervals();
  for (int k = 0; k < K; ++k) {
    const double a = T * static_cast<double>(k) / K;
    const double b = T * static_cast<double>(k + 1) / K;
    const int nsub = std::max(1, static_cast<int>(std::ceil((b - a) / opts.step_h - 1e-12)));
    for (int j = 0; j < nsub; ++j) mesh.push_back(a + (b - a) * static_cast<double>(j) / nsub);
  }
  mesh.push_back(T);

  Recorder rec;
  rec.time_eps = time_eps;
  double t = 0.0;
  Vec x = xi.x0;
  int event_count = 0;

  auto note_event = [&](double te, EventKind kind) {
    rec.traj.events.push_back(Event{te, kind});
    if (++event_count > opts.event_cap) {
      throw ZenoSuspected("event count exceeded cap of " + std::to_string(opts.event_cap));
    }
  };

  // Starting regime.
  Regime regime;
  {
    const double g0 = sys.guard(x);
    const Vec& u0 = xi.input_at(0.0, T);
    if (g0 < -tol) {
      regime = Regime::Interior1;
      rec.push(t, x, g0, ModeLabel::D1, u0);
    } else if (g0 > tol) {
      regime = Regime::Interior2;
      rec.push(t, x, g0, ModeLabel::D2, u0);
    } else {
      const ModeLabel m0 = classify(sys, x, u0, tol);
      if (m0 == ModeLabel::SlidingOnSigma) {
        regime = Regime::Sliding;
      } else {
        regime = lie_derivatives(sys, x, u0).lf1 > 0.0 ? Regime::Interior2 : Regime::Interior1;
      }
      rec.push(t, x, g0, m0, u0);
    }
  }

  // One interior RK4 sub-step of size at most dt; localizes a surface hit
  // by bisection on the one-step map. Returns the time actually advanced.
  auto interior_step = [&](double dt, const Vec& u) -> double {
    const DynamicsFn& f = (regime == Regime::Interior1) ? sys.f1 : sys.f2;
    const double side = (regime == Regime::Interior1) ? -1.0 : 1.0;
    const double g_here = sys.guard(x);
    Vec x_prop = rk4_step(f, x, u, dt);
    double g_prop = sys.guard(x_prop);
    const bool wrong_side = g_prop * side < 0.0 && std::abs(g_prop) > tol;
    const bool on_surface = std::abs(g_prop) <= tol;
    if (!(wrong_side || (on_surface && std::abs(g_here) > tol))) {
      t += dt;
      x = std::move(x_prop);
      rec.push(t, x, g_prop, regime == Regime::Interior1 ? ModeLabel::D1 : ModeLabel::D2, u);
      return dt;
    }

    // Bisection for the hit time within (0, dt].
    double lo = 0.0, hi = dt;
    Vec x_hit = x_prop;
    bool located = on_surface;
    for (int it = 0; it < opts.bisection_cap && !located; ++it) {
      const double mid = 0.5 * (lo + hi);
      Vec x_mid = rk4_step(f, x, u, mid);
      const double g_mid = sys.guard(x_mid);
      if (std::abs(g_mid) <= tol) {
        hi = mid;
        x_hit = std::move(x_mid);
        located = true;
        break;
      }
      if (g_mid * side > 0.0) {
        lo = mid;
      } else {
        hi = mid;
        x_hit = std::move(x_mid);
      }
    }
    if (!located) x_hit = project_to_surface(sys, x_hit, tol);
    const double t_hit = t + hi;
    const ModeLabel at_surface = classify(sys, x_hit, u, tol);
    t = t_hit;
    x = std::move(x_hit);
    const double g_hit = sys.guard(x);
    if (at_surface == ModeLabel::SlidingOnSigma) {
      note_event(t, EventKind::Arrival);
      regime = Regime::Sliding;
      rec.push(t, x, g_hit, ModeLabel::SlidingOnSigma, u);
    } else {
      note_event(t, EventKind::Crossing);
      regime = lie_derivatives(sys, x, u).lf1 > 0.0 ? Regime::Interior2 : Regime::Interior1;
      rec.push(t, x, g_hit, ModeLabel::CrossingSigma, u);
    }
    return hi;
  };

  // Sliding RHS with per-stage projection onto the surface.
  auto slide_step_map = [&](const Vec& from, const Vec& u, double dt) -> Vec {
    auto stage = [&](const Vec& y) { return sliding_field(sys, project_to_surface(sys, y, tol), u); };
    const Vec k1 = stage(from);
    const Vec k2 = stage(from + 0.5 * dt * k1);
    const Vec k3 = stage(from + 0.5 * dt * k2);
    const Vec k4 = stage(from + dt * k3);
    return project_to_surface(sys, from + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), tol);
  };

  // Margin that is positive exactly while sliding persists.
  auto slide_margin = [&](const Vec& y, const Vec& u) {
    const LiePair lie = lie_derivatives(sys, y, u);
    return std::min(lie.lf1, -lie.lf2);
  };

  auto leave_surface = [&](const Vec& u) {
    const LiePair lie = lie_derivatives(sys, x, u);
    note_event(t, EventKind::Exit);
    regime = lie.lf1 <= 0.0 ? Regime::Interior1 : Regime::Interior2;
    rec.push(t, x, sys.guard(x), ModeLabel::SlidingOnSigma, u);
  };

  auto sliding_step = [&](double dt, const Vec& u) -> double {
    // The hold input may have just jumped and ended the sliding condition.
    if (slide_margin(x, u) <= 0.0) {
      leave_surface(u);
      return 0.0;
    }
    Vec x_prop = slide_step_map(x, u, dt);
    if (slide_margin(x_prop, u) > 0.0) {
      t += dt;
      x = std::move(x_prop);
      rec.push(t, x, sys.guard(x), ModeLabel::SlidingOnSigma, u);
      return dt;
    }
    // Bisect the exit time on the sliding flow.
    double lo = 0.0, hi = dt;
    for (int it = 0; it < opts.bisection_cap && (hi - lo) > time_eps; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (slide_margin(slide_step_map(x, u, mid), u) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double advanced = hi;
    x = slide_step_map(x, u, advanced);
    t += advanced;
    leave_surface(u);
    return advanced;
  };

  for (std::size_t seg = 0; seg + 1 < mesh.size(); ++seg) {
    const double seg_end = mesh[seg + 1];
    const Vec& u = xi.input_at(mesh[seg], T);
    while (t < seg_end - time_eps) {
      const double dt = seg_end - t;
      if (regime == Regime::Sliding) {
        const double advanced = sliding_step(dt, u);
        if (advanced == 0.0 && regime == Regime::Sliding) {
          throw NumericalError("sliding integration stalled");
        }
      } else {
        interior_step(dt, u);
      }
    }
  }

  if (!rec.traj.states.back().allFinite()) {
    throw NumericalError("integrate_filippov: non-finite state");
  }
  return rec.traj;
}

DifferentiabilityReport audit_differentiability(const Trajectory& traj,
                                                const PiecewiseSmoothSystem& sys,
                                                const AuditOptions& opts) {
  DifferentiabilityReport report;
  const double T = traj.final_time();

  for (const Event& e : traj.events) {
    if (e.kind == EventKind::Arrival || e.kind == EventKind::Crossing) {
      report.arrival_times.push_back(e.time);
    }
    if (e.kind == EventKind::Exit && T - e.time <= 1e-9 * std::max(1.0, T)) {
      report.exit_at_final_time = true;
    }
  }

  // Tangential touches leave no sign change for the event detector; scan
  // interior samples for local minima of |g| at skim depth.
  const std::size_t n = traj.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (traj.modes[i] != ModeLabel::D1 && traj.modes[i] != ModeLabel::D2) continue;
    const double a = std::abs(traj.guard_values[i]);
    if (a > opts.skim_tol) continue;
    if (a > std::abs(traj.guard_values[i - 1]) || a > std::abs(traj.guard_values[i + 1])) continue;
    bool near_existing = false;
    for (double known : report.arrival_times) {
      if (std::abs(known - traj.times[i]) <= opts.window_gamma) {
        near_existing = true;
        break;
      }
    }
    if (!near_existing) report.arrival_times.push_back(traj.times[i]);
  }
  std::sort(report.arrival_times.begin(), report.arrival_times.end());

  if (std::abs(traj.guard_values.front()) <= opts.guard_tol) report.assumption2_ok = false;
  for (double th : report.arrival_times) {
    if (T - th < opts.window_gamma) report.assumption2_ok = false;
  }

  report.assumption4_ok =
      static_cast<int>(report.arrival_times.size()) <= opts.arrival_cap;

  auto input_for_sample = [&](std::size_t i) -> const Vec& {
    const std::size_t k = std::min(i, traj.inputs.size() - 1);
    return traj.inputs[k];
  };

  for (double th : report.arrival_times) {
    // Side the trajectory approached from: last clearly-interior sample before th.
    double side = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      if (traj.times[i] >= th) continue;
      if (std::abs(traj.guard_values[i]) > opts.guard_tol) {
        side = traj.guard_values[i] < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    if (side == 0.0) side = -1.0;

    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(traj.times[i] - th) > opts.window_gamma) continue;
      const LiePair lie = lie_derivatives(sys, traj.states[i], input_for_sample(i));
      margin = std::min(margin, side < 0.0 ? lie.lf1 : -lie.lf2);
    }
    report.transversality_margins.push_back(margin);
    if (!(margin > 0.0)) report.assumption3_ok = false;
  }

  return report;
}

}  // namespace pwsopt
