#include <doctest.h>

#include <json.hpp>

#include "pwsopt/filippov.hpp"
#include "pwsopt/io.hpp"
#include "pwsopt/smooth_sim.hpp"
#include "pwsopt/transition.hpp"
#include "test_support.hpp"

using namespace pwsopt;
using namespace pwsopt::testing;

TEST_SUITE("io") {

TEST_CASE("doubles print as shortest round-trip decimals") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-10) == "-2.5e-10");
  auto rng = make_rng(83);
  for (int i = 0; i < 300; ++i) {
    const double v = random_vec(rng, 1, -1e6, 1e6)(0) * std::pow(10.0, (i % 13) - 6);
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("trajectory CSV round-trips byte-identically") {
  const BuiltinProblem p = builtin_problem("sliding1d");
  const ControlData xi = ControlData::constant(p.default_x0, Vec::Zero(1), 4);
  const Trajectory traj = integrate_filippov(p.sys, xi, p.default_T);

  const std::string csv = trajectory_to_csv(traj);
  const Trajectory parsed = trajectory_from_csv(csv);
  CHECK(trajectory_to_csv(parsed) == csv);

  REQUIRE(parsed.size() == traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(parsed.times[i] == traj.times[i]);
    CHECK((parsed.states[i].array() == traj.states[i].array()).all());
    CHECK(parsed.guard_values[i] == traj.guard_values[i]);
    CHECK(parsed.modes[i] == traj.modes[i]);
  }
  REQUIRE(parsed.inputs.size() == traj.inputs.size());

  // Header carries the exact column layout.
  CHECK(csv.rfind("t,x_1,u_1,g,mode\n", 0) == 0);
}

TEST_CASE("hopper trajectory CSV keeps all state columns") {
  const PiecewiseSmoothSystem sys = hopper_system(HopperParams{});
  Vec x0(4);
  x0 << 1.0, 0.0, 0.75, 0.0;
  FilippovOptions opts;
  opts.step_h = 5e-3;
  const Trajectory traj =
      integrate_filippov(sys, ControlData::constant(x0, Vec::Zero(1), 2), 0.5, opts);
  const std::string csv = trajectory_to_csv(traj);
  CHECK(csv.rfind("t,x_1,x_2,x_3,x_4,u_1,g,mode\n", 0) == 0);
  CHECK(trajectory_to_csv(trajectory_from_csv(csv)) == csv);
}

TEST_CASE("events and study results serialize with schema versions") {
  std::vector<Event> events{{0.5, EventKind::Arrival}, {1.25, EventKind::Exit}};
  const nlohmann::json j = events_to_json(events);
  CHECK(j["schema_version"] == 1);
  CHECK(j["events"].size() == 2);
  CHECK(j["events"][0]["kind"] == "arrival");
  CHECK(j["events"][1]["time"] == 1.25);

  RateStudy study;
  study.epsilons = {1e-1, 1e-2};
  study.errors = {0.3, 0.03};
  study.fitted_slope = 1.0;
  study.r_squared = 0.999;
  study.pass = true;
  const nlohmann::json verdict = rate_study_to_json(study);
  CHECK(verdict["pass"] == true);
  CHECK(verdict["slope"] == 1.0);
  CHECK(rate_study_to_csv(study) == "epsilon,error\n0.1,0.3\n0.01,0.03\n");
}

TEST_CASE("optimization report embeds the resolved config") {
  OptimizationReport report;
  report.final_xi = ControlData::constant(scalar(0.0), scalar(0.5), 2);
  report.cost_history = {2.0, 1.0};
  report.grad_norm_history = {1.0, 0.1};
  report.theta_final = -0.01;
  report.termination = Termination::MaxIter;
  StageRecord stage;
  stage.epsilon = 0.1;
  stage.iterations = 1;
  report.stages.push_back(stage);

  const nlohmann::json echo = {{"system", "crossing1d"}, {"epsilon", 0.1}};
  const nlohmann::json j = report_to_json(report, echo);
  CHECK(j["config"]["system"] == "crossing1d");
  CHECK(j["termination"] == "max_iter");
  CHECK(j["final_cost"] == 1.0);
  CHECK(j["stages"].size() == 1);
  CHECK(j["final_data"]["u"].size() == 2);

  const std::string text = report_summary_text(report);
  CHECK(text.find("max_iter") != std::string::npos);
}

}  // TEST_SUITE
