// Command-line front end: simulate / optimize / converge over the builtin
// example systems, with JSON configs and CSV/JSON artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pwsopt/builtin_systems.hpp"
#include "pwsopt/convergence.hpp"
#include "pwsopt/errors.hpp"
#include "pwsopt/filippov.hpp"
#include "pwsopt/hopper.hpp"
#include "pwsopt/io.hpp"
#include "pwsopt/optimizer.hpp"
#include "pwsopt/smooth_sim.hpp"
#include "pwsopt/transition.hpp"

namespace {

using nlohmann::json;
using namespace pwsopt;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerdict = 4;

Vec vec_from_json(const json& arr) {
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad number in list: '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

/// Everything a run needs, with defaults materialized for the echo.
struct Resolved {
  std::string system;
  BuiltinProblem problem;
  bool is_hopper = false;
  HopperTask task;
  HopperParams params;
  double horizon = 1.0;
  int gridpoints = 2001;
  double epsilon = 0.01;
  std::vector<double> schedule;
  ControlData data;  // boxes attached
  CostFunctional cost;
  Direction direction;
  FilippovOptions filippov;
  SolverOptions solver;
  std::vector<double> epsilons;  // convergence studies
  std::array<double, 2> slope_window{0.8, 1.2};
  double ratio_cap = 10.0;
  ErrorMetric metric = ErrorMetric::MaxOverTime;
  Scheme scheme = Scheme::Euler;
  json echo;
};

CostFunctional cost_from_config(const json& cfg, int n, const CostFunctional& fallback) {
  if (!cfg.contains("cost")) return fallback;
  const json& c = cfg.at("cost");
  const std::string type = c.value("type", "coordinate");
  if (type == "coordinate" || type == "squared_coordinate") {
    const int index = c.value("index", 0);
    if (index < 0 || index >= n) throw ConfigError("cost index out of range");
    CostFunctional out;
    if (type == "coordinate") {
      out.terminal = [index](const Vec& x) { return x(index); };
      out.terminal_grad = [n, index](const Vec&) {
        Vec g = Vec::Zero(n);
        g(index) = 1.0;
        return g;
      };
    } else {
      out.terminal = [index](const Vec& x) { return x(index) * x(index); };
      out.terminal_grad = [n, index](const Vec& x) {
        Vec g = Vec::Zero(n);
        g(index) = 2.0 * x(index);
        return g;
      };
    }
    return out;
  }
  if (type == "target") {
    const Vec target = vec_from_json(c.at("target"));
    if (target.size() != n) throw ConfigError("cost target dimension mismatch");
    CostFunctional out;
    out.terminal = [target](const Vec& x) { return (x - target).squaredNorm(); };
    out.terminal_grad = [target](const Vec& x) { return Vec(2.0 * (x - target)); };
    return out;
  }
  throw ConfigError("unknown cost type: " + type);
}

Resolved resolve(const std::string& config_path) {
  json cfg;
  {
    std::string text;
    try {
      text = read_text_file(config_path);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    cfg = json::parse(text, nullptr, false);
    if (cfg.is_discarded()) throw ConfigError("config is not valid JSON: " + config_path);
  }
  if (!cfg.contains("system")) throw ConfigError("config needs a 'system' key");

  Resolved r;
  r.system = cfg.at("system").get<std::string>();
  r.problem = builtin_problem(r.system);
  r.is_hopper = r.system == "hopper";

  if (r.is_hopper) {
    const json t = cfg.value("task", json::object());
    r.task.z_apex = t.value("z_apex", r.task.z_apex);
    r.task.t_apex = t.value("t_apex", r.task.t_apex);
    r.task.t_f = t.value("t_f", r.task.t_f);
    r.task.u_lo = t.value("u_lo", r.task.u_lo);
    r.task.u_hi = t.value("u_hi", r.task.u_hi);
    r.task.effort_weight = t.value("effort_weight", 1e-2);
    const json p = cfg.value("params", json::object());
    const HopperParams preset = hopper_experiment_params();
    r.params.m = p.value("m", preset.m);
    r.params.k0 = p.value("k0", preset.k0);
    r.params.d0 = p.value("d0", preset.d0);
    r.params.gravity = p.value("gravity", preset.gravity);
    r.params.travel = p.value("travel", preset.travel);
    r.params.leg_ref = p.value("leg_ref", preset.leg_ref);
    r.problem.sys = hopper_system(r.params);
    r.gridpoints = 181;
  }

  const json horizon = cfg.value("horizon", json::object());
  r.horizon = horizon.value("T", r.is_hopper ? r.task.t_f : r.problem.default_T);
  r.gridpoints = horizon.value("N", r.gridpoints);
  if (r.gridpoints < 2) throw ConfigError("horizon.N must be at least 2");
  if (!(r.horizon > 0.0)) throw ConfigError("horizon.T must be positive");

  r.epsilon = cfg.value("epsilon", 0.01);
  if (cfg.contains("schedule")) r.schedule = cfg.at("schedule").get<std::vector<double>>();
  if (cfg.contains("epsilons")) r.epsilons = cfg.at("epsilons").get<std::vector<double>>();
  if (r.epsilons.empty()) r.epsilons = default_epsilon_schedule();

  r.data.x0 = cfg.contains("x0") ? vec_from_json(cfg.at("x0")) : r.problem.default_x0;
  if (r.data.x0.size() != r.problem.sys.state_dim) throw ConfigError("x0 dimension mismatch");

  const int intervals = r.gridpoints - 1;
  if (cfg.contains("u0")) {
    const json& u0 = cfg.at("u0");
    for (const json& row : u0) r.data.u.push_back(vec_from_json(row));
    if (static_cast<int>(r.data.u.size()) != intervals) {
      r.data.u = resample_hold(r.data.u, intervals);
    }
  } else {
    const double u_init = cfg.value("u_init", 0.0);
    r.data.u.assign(static_cast<std::size_t>(intervals),
                    Vec::Constant(r.problem.sys.input_dim, u_init));
  }

  const json boxes = cfg.value("boxes", json::object());
  Box x0_box = r.problem.default_x0_box;
  Box u_box = r.problem.default_u_box;
  if (boxes.contains("x0_lo")) x0_box.lo = vec_from_json(boxes.at("x0_lo"));
  if (boxes.contains("x0_hi")) x0_box.hi = vec_from_json(boxes.at("x0_hi"));
  if (boxes.contains("u_lo")) u_box.lo = Vec::Constant(1, boxes.at("u_lo").get<double>());
  if (boxes.contains("u_hi")) u_box.hi = Vec::Constant(1, boxes.at("u_hi").get<double>());
  if (boxes.value("freeze_x0", r.is_hopper)) x0_box = Box::fixed(r.data.x0);
  if (!x0_box.well_ordered() || !u_box.well_ordered()) {
    throw ConfigError("box bounds are not well-ordered (lo > hi)");
  }
  r.data.x0_box = x0_box;
  r.data.u_box = u_box;

  r.cost = cost_from_config(cfg, r.problem.sys.state_dim, r.problem.default_cost);
  r.direction = r.problem.default_direction;

  const json fil = cfg.value("filippov", json::object());
  r.filippov.step_h = fil.value("step_h", 1e-3);
  r.filippov.guard_tol = fil.value("guard_tol", 1e-10);
  r.filippov.event_cap = fil.value("event_cap", 1000);

  const json solver = cfg.value("solver", json::object());
  r.solver.theta_tol = solver.value("theta_tol", 1e-6);
  r.solver.max_iter = solver.value("max_iter", r.is_hopper ? 12000 : 2000);
  r.solver.carry_step = solver.value("carry_step", true);

  const json study = cfg.value("study", json::object());
  r.slope_window[0] = study.value("slope_lo", 0.8);
  r.slope_window[1] = study.value("slope_hi", 1.2);
  r.ratio_cap = study.value("ratio_cap", 10.0);
  if (study.value("metric", std::string("max")) == std::string("final")) {
    r.metric = ErrorMetric::FinalState;
  }
  if (cfg.value("scheme", std::string("euler")) == std::string("rk4")) r.scheme = Scheme::RK4;

  // Fully-resolved echo for reproducibility.
  r.echo = {{"schema_version", kSchemaVersion},
            {"system", r.system},
            {"x0", vec_to_json(r.data.x0)},
            {"horizon", {{"T", r.horizon}, {"N", r.gridpoints}}},
            {"epsilon", r.epsilon},
            {"schedule", r.schedule},
            {"epsilons", r.epsilons},
            {"boxes",
             {{"x0_lo", vec_to_json(x0_box.lo)},
              {"x0_hi", vec_to_json(x0_box.hi)},
              {"u_lo", u_box.lo(0)},
              {"u_hi", u_box.hi(0)}}},
            {"solver",
             {{"theta_tol", r.solver.theta_tol},
              {"max_iter", r.solver.max_iter},
              {"carry_step", r.solver.carry_step}}},
            {"filippov", {{"step_h", r.filippov.step_h}, {"guard_tol", r.filippov.guard_tol}}},
            {"scheme", r.scheme == Scheme::RK4 ? "rk4" : "euler"},
            {"study",
             {{"slope_lo", r.slope_window[0]},
              {"slope_hi", r.slope_window[1]},
              {"ratio_cap", r.ratio_cap},
              {"metric", r.metric == ErrorMetric::FinalState ? "final" : "max"}}}};
  if (r.is_hopper) {
    r.echo["task"] = {{"z_apex", r.task.z_apex},   {"t_apex", r.task.t_apex},
                      {"t_f", r.task.t_f},         {"u_lo", r.task.u_lo},
                      {"u_hi", r.task.u_hi},       {"effort_weight", r.task.effort_weight}};
    r.echo["params"] = {{"m", r.params.m},           {"k0", r.params.k0},
                        {"d0", r.params.d0},         {"gravity", r.params.gravity},
                        {"travel", r.params.travel}, {"leg_ref", r.params.leg_ref}};
  }
  return r;
}

std::string input_csv(const ControlData& xi, double horizon) {
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= xi.input_dim(); ++i) out << ",u_" << i;
  out << "\n";
  const double h = horizon / static_cast<double>(xi.intervals());
  for (int k = 0; k < xi.intervals(); ++k) {
    out << format_double(h * static_cast<double>(k));
    for (int i = 0; i < xi.input_dim(); ++i) {
      out << ',' << format_double(xi.u[static_cast<std::size_t>(k)](i));
    }
    out << "\n";
  }
  return out.str();
}

int cmd_simulate(const std::string& config_path, const std::string& mode,
                 double epsilon_flag, const std::string& out_path) {
  Resolved r = resolve(config_path);
  if (epsilon_flag > 0.0) r.epsilon = epsilon_flag;
  r.echo["epsilon"] = r.epsilon;
  r.echo["mode"] = mode;

  Trajectory traj;
  if (mode == "filippov") {
    traj = integrate_filippov(r.problem.sys, r.data, r.horizon, r.filippov);
  } else if (mode == "smooth") {
    const RegularizedField field(r.problem.sys, make_quintic_transition(), r.epsilon);
    ControlData xi = r.data;
    xi.u = resample_hold(xi.u, r.gridpoints - 1);
    traj = integrate_smooth(field, xi, r.horizon, r.gridpoints, r.scheme);
  } else {
    throw ConfigError("unknown mode: " + mode);
  }

  write_text_file(out_path, trajectory_to_csv(traj));
  json events = events_to_json(traj.events);
  events["config"] = r.echo;
  write_text_file(out_path + ".events.json", events.dump(2) + "\n");
  json phases = phases_to_json(extract_phases(traj));
  phases["config"] = r.echo;
  write_text_file(out_path + ".phases.json", phases.dump(2) + "\n");
  return kExitOk;
}

int cmd_optimize(const std::string& config_path, double epsilon_flag,
                 const std::string& schedule_flag, const std::string& out_dir) {
  Resolved r = resolve(config_path);
  if (epsilon_flag > 0.0) r.schedule = {epsilon_flag};
  if (!schedule_flag.empty()) r.schedule = parse_double_list(schedule_flag);
  if (r.schedule.empty()) r.schedule = {r.epsilon};
  r.echo["schedule"] = r.schedule;

  std::filesystem::create_directories(out_dir);
  const TransitionFunction phi = make_quintic_transition();

  OptimizationReport report;
  Trajectory smooth, replay;
  if (r.is_hopper) {
    HopperRunOptions opts;
    opts.gridpoints = r.gridpoints;
    opts.schedule = r.schedule;
    opts.solver = r.solver;
    opts.replay = r.filippov;
    if (!r.data.u.empty() && r.data.u.front().size() == 1) opts.initial_u = r.data.u;
    const HopperRunResult result = optimize_hopping(r.task, r.params, opts);
    report = result.report;
    smooth = result.smooth;
    replay = result.replay;
    json phases = phases_to_json(result.phases);
    phases["flight_phases_before_apex"] = result.flight_phases_before_apex;
    phases["config"] = r.echo;
    write_text_file(out_dir + "/phases.json", phases.dump(2) + "\n");
  } else {
    report = master_algorithm(r.problem.sys, phi, r.data, r.cost, r.horizon, r.gridpoints,
                              r.schedule, {}, r.solver, r.filippov);
    const RegularizedField field(r.problem.sys, phi, r.schedule.back());
    smooth = integrate_smooth(field, report.final_xi, r.horizon, r.gridpoints, r.scheme);
    replay = integrate_filippov(r.problem.sys, report.final_xi, r.horizon, r.filippov);
    json phases = phases_to_json(extract_phases(replay));
    phases["config"] = r.echo;
    write_text_file(out_dir + "/phases.json", phases.dump(2) + "\n");
  }

  write_text_file(out_dir + "/report.json", report_to_json(report, r.echo).dump(2) + "\n");
  write_text_file(out_dir + "/summary.txt", report_summary_text(report));
  write_text_file(out_dir + "/optimized_input.csv", input_csv(report.final_xi, r.horizon));
  write_text_file(out_dir + "/smooth.csv", trajectory_to_csv(smooth));
  write_text_file(out_dir + "/replay.csv", trajectory_to_csv(replay));
  json events = events_to_json(replay.events);
  events["config"] = r.echo;
  write_text_file(out_dir + "/replay.events.json", events.dump(2) + "\n");
  if (report.audit) {
    write_text_file(out_dir + "/audit.json", audit_to_json(*report.audit).dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_converge(const std::string& config_path, const std::string& study_name,
                 const std::string& epsilons_flag, const std::string& out_prefix) {
  Resolved r = resolve(config_path);
  if (!epsilons_flag.empty()) r.epsilons = parse_double_list(epsilons_flag);
  r.echo["epsilons"] = r.epsilons;
  const TransitionFunction phi = make_quintic_transition();

  auto write_error_verdict = [&](const char* name, const std::string& message) {
    json verdict = {{"schema_version", kSchemaVersion},
                    {"pass", false},
                    {"error", name},
                    {"message", message},
                    {"config", r.echo}};
    write_text_file(out_prefix + ".verdict.json", verdict.dump(2) + "\n");
  };

  try {
    if (study_name == "trajectory") {
      TrajectoryStudyOptions opts;
      opts.slope_window = r.slope_window;
      opts.metric = r.metric;
      opts.reference = r.filippov;
      const RateStudy study = trajectory_rate_study(r.problem.sys, phi, r.data, r.horizon,
                                                    r.epsilons, opts);
      write_text_file(out_prefix + ".csv", rate_study_to_csv(study));
      json verdict = rate_study_to_json(study);
      verdict["config"] = r.echo;
      write_text_file(out_prefix + ".verdict.json", verdict.dump(2) + "\n");
      return study.pass ? kExitOk : kExitVerdict;
    }
    if (study_name == "derivative") {
      DerivativeStudyOptions opts;
      opts.slope_window = r.slope_window;
      opts.audit_sim = r.filippov;
      const RateStudy study = derivative_rate_study(r.problem.sys, phi, r.data, r.direction,
                                                    r.cost, r.horizon, r.epsilons, opts);
      write_text_file(out_prefix + ".csv", rate_study_to_csv(study));
      json verdict = rate_study_to_json(study);
      verdict["config"] = r.echo;
      write_text_file(out_prefix + ".verdict.json", verdict.dump(2) + "\n");
      return study.pass ? kExitOk : kExitVerdict;
    }
    if (study_name == "boundedness") {
      const BoundednessStudy study = gradient_boundedness_study(
          r.problem.sys, phi, r.data, r.cost, r.horizon, r.epsilons, r.direction, r.ratio_cap);
      write_text_file(out_prefix + ".csv", boundedness_to_csv(study.rows));
      json verdict = boundedness_to_json(study);
      verdict["config"] = r.echo;
      write_text_file(out_prefix + ".verdict.json", verdict.dump(2) + "\n");
      return study.pass ? kExitOk : kExitVerdict;
    }
  } catch (const AuditFailed& e) {
    write_error_verdict("AuditFailed", e.what());
    return kExitVerdict;
  } catch (const InsufficientDecay& e) {
    write_error_verdict("InsufficientDecay", e.what());
    return kExitVerdict;
  }
  throw ConfigError("unknown study: " + study_name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of bimodal piecewise-smooth systems via "
               "epsilon-regularization"};
  app.require_subcommand(1);

  std::string config_path, out_path = "trajectory.csv", out_dir = "out",
              out_prefix = "study", mode = "filippov", study = "trajectory",
              schedule_flag, epsilons_flag;
  double epsilon_flag = 0.0;

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate one trajectory");
  simulate->add_option("config", config_path)->required();
  simulate->add_option("--mode", mode)->check(CLI::IsMember({"filippov", "smooth"}));
  simulate->add_option("--epsilon", epsilon_flag);
  simulate->add_option("--out", out_path);

  CLI::App* optimize = app.add_subcommand("optimize", "Run the epsilon-reduction optimizer");
  optimize->add_option("config", config_path)->required();
  optimize->add_option("--epsilon", epsilon_flag);
  optimize->add_option("--schedule", schedule_flag, "comma-separated epsilon stages");
  optimize->add_option("--out-dir", out_dir);

  CLI::App* converge = app.add_subcommand("converge", "Run a convergence-rate study");
  converge->add_option("config", config_path)->required();
  converge->add_option("--study", study)
      ->check(CLI::IsMember({"trajectory", "derivative", "boundedness"}));
  converge->add_option("--epsilons", epsilons_flag, "comma-separated epsilons");
  converge->add_option("--out", out_prefix);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, mode, epsilon_flag, out_path);
    if (optimize->parsed()) return cmd_optimize(config_path, epsilon_flag, schedule_flag, out_dir);
    if (converge->parsed()) return cmd_converge(config_path, study, epsilons_flag, out_prefix);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TransversalityViolation& e) {
    std::cerr << "error: TransversalityViolation: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ZenoSuspected& e) {
    std::cerr << "error: ZenoSuspected: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const NumericalError& e) {
    std::cerr << "error: NumericalError: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
