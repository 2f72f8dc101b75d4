#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace pwsopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Componentwise interval bounds, lo(i) <= hi(i).
struct Box {
  Vec lo;
  Vec hi;

  bool well_ordered() const;
  Vec clamp(const Vec& v) const;
  bool contains(const Vec& v, double tol = 0.0) const;

  /// Degenerate box {v}, used to freeze coordinates.
  static Box fixed(const Vec& v) { return Box{v, v}; }
  static Box uniform(int dim, double lo, double hi);
};

/// Decision data: initial state plus a piecewise-constant input signal
/// held over a uniform grid of u.size() intervals covering [0,T].
struct ControlData {
  Vec x0;
  std::vector<Vec> u;
  std::optional<Box> x0_box;
  std::optional<Box> u_box;

  int state_dim() const { return static_cast<int>(x0.size()); }
  int input_dim() const { return u.empty() ? 0 : static_cast<int>(u.front().size()); }
  int intervals() const { return static_cast<int>(u.size()); }

  /// Index of the hold interval containing time t in [0,T].
  int interval_index(double t, double T) const;
  const Vec& input_at(double t, double T) const;

  /// Constant-input data with k intervals.
  static ControlData constant(const Vec& x0, const Vec& u_value, int k);
};

/// Re-holds a piecewise-constant signal on a grid with k_new intervals
/// over the same horizon. Exact when k_new is a multiple of u.size().
std::vector<Vec> resample_hold(const std::vector<Vec>& u, int k_new);

enum class ModeLabel {
  D1,             // g < 0 interior
  D2,             // g > 0 interior
  SlidingOnSigma, // on the surface, sliding vector field active
  CrossingSigma,  // on the surface, passing through
  SigmaBand,      // inside the regularization band |g| < epsilon (smooth runs)
};

const char* to_string(ModeLabel mode);
std::optional<ModeLabel> mode_from_string(const std::string& s);

enum class EventKind { Arrival, Exit, Crossing };

const char* to_string(EventKind kind);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
};

/// Time-stamped simulation output shared by both integrators.
/// states/guard_values/modes have one entry per time, inputs one per
/// interval between consecutive times.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  std::vector<double> guard_values;
  std::vector<ModeLabel> modes;
  std::vector<Event> events;

  std::size_t size() const { return times.size(); }
  const Vec& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }

  /// Linear interpolation between recorded samples; clamps to [t0, T].
  Vec state_at(double t) const;
};

}  // namespace pwsopt
