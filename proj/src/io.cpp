#include "pwsopt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pwsopt/errors.hpp"

namespace pwsopt {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("trajectory CSV: bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  const int n = static_cast<int>(traj.states.front().size());
  const int m = traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs.front().size());
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  for (int i = 1; i <= m; ++i) out << ",u_" << i;
  out << ",g,mode\n";
  for (std::size_t row = 0; row < traj.size(); ++row) {
    out << format_double(traj.times[row]);
    for (int i = 0; i < n; ++i) out << ',' << format_double(traj.states[row](i));
    const std::size_t k = traj.inputs.empty() ? 0 : std::min(row, traj.inputs.size() - 1);
    for (int i = 0; i < m; ++i) out << ',' << format_double(traj.inputs[k](i));
    out << ',' << format_double(traj.guard_values[row]) << ',' << to_string(traj.modes[row])
        << '\n';
  }
  return out.str();
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("trajectory CSV: empty input");
  const auto header = split(line, ',');
  int n = 0, m = 0;
  for (const std::string& h : header) {
    if (h.rfind("x_", 0) == 0) ++n;
    if (h.rfind("u_", 0) == 0) ++m;
  }
  if (header.size() != static_cast<std::size_t>(3 + n + m) || header.front() != "t" ||
      header.back() != "mode") {
    throw Error("trajectory CSV: unrecognized header");
  }

  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw Error("trajectory CSV: ragged row");
    std::size_t c = 0;
    traj.times.push_back(parse_double(cells[c++]));
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = parse_double(cells[c++]);
    traj.states.push_back(std::move(x));
    Vec u(m);
    for (int i = 0; i < m; ++i) u(i) = parse_double(cells[c++]);
    traj.inputs.push_back(std::move(u));
    traj.guard_values.push_back(parse_double(cells[c++]));
    const auto mode = mode_from_string(cells[c]);
    if (!mode) throw Error("trajectory CSV: unknown mode '" + cells[c] + "'");
    traj.modes.push_back(*mode);
  }
  if (traj.times.empty()) throw Error("trajectory CSV: no rows");
  // The writer repeats the last interval input on the final row.
  traj.inputs.pop_back();
  return traj;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

nlohmann::json events_to_json(const std::vector<Event>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Event& e : events) {
    arr.push_back({{"time", e.time}, {"kind", to_string(e.kind)}});
  }
  return {{"schema_version", kSchemaVersion}, {"events", arr}};
}

nlohmann::json phases_to_json(const std::vector<Phase>& phases) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Phase& p : phases) {
    arr.push_back(
        {{"mode", to_string(p.mode)}, {"t_start", p.t_start}, {"t_end", p.t_end}});
  }
  return {{"schema_version", kSchemaVersion}, {"phases", arr}};
}

nlohmann::json audit_to_json(const DifferentiabilityReport& report) {
  return {{"arrival_times", report.arrival_times},
          {"assumption2_ok", report.assumption2_ok},
          {"assumption3_ok", report.assumption3_ok},
          {"assumption4_ok", report.assumption4_ok},
          {"transversality_margins", report.transversality_margins},
          {"exit_at_final_time", report.exit_at_final_time}};
}

namespace {

nlohmann::json control_data_to_json(const ControlData& xi) {
  nlohmann::json u = nlohmann::json::array();
  for (const Vec& uk : xi.u) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < uk.size(); ++i) row.push_back(uk(i));
    u.push_back(std::move(row));
  }
  nlohmann::json x0 = nlohmann::json::array();
  for (int i = 0; i < xi.x0.size(); ++i) x0.push_back(xi.x0(i));
  return {{"x0", std::move(x0)}, {"u", std::move(u)}};
}

nlohmann::json stage_to_json(const StageRecord& s) {
  nlohmann::json j = {{"epsilon", s.epsilon},
                      {"iterations", s.iterations},
                      {"termination", to_string(s.termination)},
                      {"theta", s.theta_final},
                      {"cost", s.cost_final}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

}  // namespace

nlohmann::json report_to_json(const OptimizationReport& report,
                              const nlohmann::json& config_echo) {
  nlohmann::json stages = nlohmann::json::array();
  for (const StageRecord& s : report.stages) stages.push_back(stage_to_json(s));
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"config", config_echo},
                      {"termination", to_string(report.termination)},
                      {"theta", report.theta_final},
                      {"final_cost", report.cost_history.empty() ? 0.0 : report.cost_history.back()},
                      {"cost_history", report.cost_history},
                      {"grad_norm_history", report.grad_norm_history},
                      {"stages", std::move(stages)},
                      {"final_data", control_data_to_json(report.final_xi)}};
  if (report.audit) j["audit"] = audit_to_json(*report.audit);
  return j;
}

std::string report_summary_text(const OptimizationReport& report) {
  std::ostringstream out;
  out << "termination: " << to_string(report.termination) << "\n";
  out << "final cost:  "
      << format_double(report.cost_history.empty() ? 0.0 : report.cost_history.back())
      << "\n";
  out << "theta:       " << format_double(report.theta_final) << "\n";
  out << "iterations:  "
      << (report.cost_history.empty() ? 0 : report.cost_history.size() - 1) << "\n";
  for (const StageRecord& s : report.stages) {
    out << "stage eps=" << format_double(s.epsilon) << ": " << s.iterations
        << " iters, theta=" << format_double(s.theta_final)
        << ", cost=" << format_double(s.cost_final) << ", "
        << (s.error.empty() ? to_string(s.termination) : s.error.c_str()) << "\n";
  }
  if (report.audit) {
    out << "audit: a2=" << (report.audit->assumption2_ok ? "ok" : "FAIL")
        << " a3=" << (report.audit->assumption3_ok ? "ok" : "FAIL")
        << " a4=" << (report.audit->assumption4_ok ? "ok" : "FAIL")
        << " arrivals=" << report.audit->arrival_times.size() << "\n";
  }
  return out.str();
}

nlohmann::json rate_study_to_json(const RateStudy& study) {
  return {{"schema_version", kSchemaVersion},
          {"slope", study.fitted_slope},
          {"intercept", study.fitted_intercept},
          {"r_squared", study.r_squared},
          {"slope_window", study.slope_window},
          {"pass", study.pass}};
}

std::string rate_study_to_csv(const RateStudy& study) {
  std::ostringstream out;
  out << "epsilon,error\n";
  for (std::size_t i = 0; i < study.epsilons.size(); ++i) {
    out << format_double(study.epsilons[i]) << ',' << format_double(study.errors[i]) << '\n';
  }
  return out.str();
}

nlohmann::json boundedness_to_json(const BoundednessStudy& study) {
  return {{"schema_version", kSchemaVersion},
          {"ratio", study.ratio},
          {"ratio_cap", study.ratio_cap},
          {"pass", study.pass}};
}

std::string boundedness_to_csv(const std::vector<BoundednessRow>& rows) {
  std::ostringstream out;
  out << "epsilon,grad_norm,dl_value\n";
  for (const BoundednessRow& r : rows) {
    out << format_double(r.epsilon) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.dl_value) << '\n';
  }
  return out.str();
}

}  // namespace pwsopt
