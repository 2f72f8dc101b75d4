#include "pwsopt/smooth_sim.hpp"

#include <cmath>

#include "pwsopt/errors.hpp"

namespace pwsopt {

Trajectory integrate_smooth(const RegularizedField& field, const ControlData& xi,
                            double T, int N, Scheme scheme) {
  if (N < 2) throw Error("integrate_smooth: need at least two gridpoints");
  if (xi.intervals() != N - 1) {
    throw Error("integrate_smooth: input grid must have exactly N-1 intervals");
  }
  const double h = T / static_cast<double>(N - 1);
  const double eps = field.epsilon();

  auto label = [&](double g) {
    if (g < -eps) return ModeLabel::D1;
    if (g > eps) return ModeLabel::D2;
    return ModeLabel::SigmaBand;
  };

  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(N));
  traj.states.reserve(static_cast<std::size_t>(N));
  traj.inputs.reserve(static_cast<std::size_t>(N - 1));

  Vec x = xi.x0;
  double g = field.system().guard(x);
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.guard_values.push_back(g);
  traj.modes.push_back(label(g));

  for (int k = 0; k < N - 1; ++k) {
    const Vec& u = xi.u[static_cast<std::size_t>(k)];
    if (scheme == Scheme::Euler) {
      x += h * field.eval(x, u);
    } else {
      const Vec k1 = field.eval(x, u);
      const Vec k2 = field.eval(x + 0.5 * h * k1, u);
      const Vec k3 = field.eval(x + 0.5 * h * k2, u);
      const Vec k4 = field.eval(x + h * k3, u);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!x.allFinite()) throw NumericalError("integrate_smooth: non-finite state");
    g = field.system().guard(x);
    traj.times.push_back(h * static_cast<double>(k + 1));
    traj.states.push_back(x);
    traj.guard_values.push_back(g);
    traj.modes.push_back(label(g));
    traj.inputs.push_back(u);
  }
  traj.times.back() = T;
  return traj;
}

Vec flow_endpoint(const RegularizedField& field, const ControlData& xi,
                  double T, int N, Scheme scheme) {
  return integrate_smooth(field, xi, T, N, scheme).final_state();
}

int gridpoints_for_epsilon(double T, double epsilon, int min_points) {
  const int steps = static_cast<int>(std::ceil(10.0 * T / epsilon - 1e-12));
  return std::max(min_points, steps + 1);
}

}  // namespace pwsopt
