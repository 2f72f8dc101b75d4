#include "pwsopt/types.hpp"

#include <algorithm>
#include <cmath>

#include "pwsopt/errors.hpp"

namespace pwsopt {

bool Box::well_ordered() const {
  if (lo.size() != hi.size()) return false;
  return (lo.array() <= hi.array()).all();
}

Vec Box::clamp(const Vec& v) const {
  return v.cwiseMax(lo).cwiseMin(hi);
}

bool Box::contains(const Vec& v, double tol) const {
  return (v.array() >= lo.array() - tol).all() && (v.array() <= hi.array() + tol).all();
}

Box Box::uniform(int dim, double lo_value, double hi_value) {
  return Box{Vec::Constant(dim, lo_value), Vec::Constant(dim, hi_value)};
}

int ControlData::interval_index(double t, double T) const {
  const int k = intervals();
  if (k == 0) throw Error("ControlData: empty input grid");
  const double ratio = t / T * static_cast<double>(k);
  int idx = static_cast<int>(std::floor(ratio));
  return std::clamp(idx, 0, k - 1);
}

const Vec& ControlData::input_at(double t, double T) const {
  return u[static_cast<std::size_t>(interval_index(t, T))];
}

ControlData ControlData::constant(const Vec& x0, const Vec& u_value, int k) {
  ControlData xi;
  xi.x0 = x0;
  xi.u.assign(static_cast<std::size_t>(k), u_value);
  return xi;
}

std::vector<Vec> resample_hold(const std::vector<Vec>& u, int k_new) {
  const int k_old = static_cast<int>(u.size());
  if (k_old == 0) throw Error("resample_hold: empty input grid");
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(k_new));
  for (int j = 0; j < k_new; ++j) {
    const double mid = (static_cast<double>(j) + 0.5) / static_cast<double>(k_new);
    int idx = std::clamp(static_cast<int>(std::floor(mid * k_old)), 0, k_old - 1);
    out.push_back(u[static_cast<std::size_t>(idx)]);
  }
  return out;
}

const char* to_string(ModeLabel mode) {
  switch (mode) {
    case ModeLabel::D1: return "D1";
    case ModeLabel::D2: return "D2";
    case ModeLabel::SlidingOnSigma: return "slide";
    case ModeLabel::CrossingSigma: return "cross";
    case ModeLabel::SigmaBand: return "band";
  }
  return "?";
}

std::optional<ModeLabel> mode_from_string(const std::string& s) {
  if (s == "D1") return ModeLabel::D1;
  if (s == "D2") return ModeLabel::D2;
  if (s == "slide") return ModeLabel::SlidingOnSigma;
  if (s == "cross") return ModeLabel::CrossingSigma;
  if (s == "band") return ModeLabel::SigmaBand;
  return std::nullopt;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Arrival: return "arrival";
    case EventKind::Exit: return "exit";
    case EventKind::Crossing: return "crossing";
  }
  return "?";
}

Vec Trajectory::state_at(double t) const {
  if (times.empty()) throw Error("Trajectory::state_at: empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double span = times[hi] - times[lo];
  if (span <= 0.0) return states[hi];
  const double w = (t - times[lo]) / span;
  return (1.0 - w) * states[lo] + w * states[hi];
}

}  // namespace pwsopt
