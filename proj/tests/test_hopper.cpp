#include <doctest.h>

#include <cmath>

#include "pwsopt/errors.hpp"
#include "pwsopt/filippov.hpp"
#include "pwsopt/hopper.hpp"
#include "pwsopt/smooth_sim.hpp"
#include "pwsopt/transition.hpp"
#include "test_support.hpp"

using namespace pwsopt;
using namespace pwsopt::testing;

namespace {

Vec standing_state() { return (Vec(4) << 0.65, 0.0, 0.75, 0.0).finished(); }

}  // namespace

TEST_SUITE("hopper") {

TEST_CASE("ground field balances gravity at the nominal stance") {
  const PiecewiseSmoothSystem sys = hopper_system(HopperParams{});
  const Vec f = sys.f1(standing_state(), Vec::Zero(1));
  CHECK(f(0) == 0.0);
  CHECK(f(1) == doctest::Approx(0.0).epsilon(1e-13));  // K0 * 0.1 = m g, up to rounding
  CHECK(f(2) == 0.0);
  CHECK(f(3) == 0.0);

  // The engagement-limited preset preserves the stance equilibrium.
  const Vec fe = hopper_system(hopper_experiment_params()).f1(standing_state(), Vec::Zero(1));
  CHECK(fe(1) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("flight is ballistic regardless of the spring state") {
  const PiecewiseSmoothSystem sys = hopper_system(HopperParams{});
  auto rng = make_rng(71);
  for (int i = 0; i < 100; ++i) {
    Vec x = random_vec(rng, 4, 0.1, 2.0);
    x(0) = x(2) + 0.3;  // airborne
    const Vec f = sys.f2(x, random_vec(rng, 1, -10.0, 10.0));
    CHECK(f(1) == -9.81);
  }
}

TEST_CASE("hopper Jacobians match finite differences") {
  CHECK(check_jacobians(hopper_system(HopperParams{}), 30, 77, 1e-5).ok);
  CHECK(check_jacobians(hopper_system(hopper_experiment_params()), 30, 78, 1e-5).ok);
}

TEST_CASE("cost pieces evaluate the printed residuals") {
  const HopperTask task;
  const HopperCost cost = hopper_cost(task);

  // A state meeting the apex exactly contributes nothing.
  Vec perfect_apex = Vec::Zero(5);
  perfect_apex(0) = 1.0;
  CHECK(cost.apex_cost.terminal(perfect_apex) == 0.0);

  Vec perfect_settle = Vec::Zero(5);
  perfect_settle(0) = 0.65;
  CHECK(cost.settle_cost.terminal(perfect_settle) == 0.0);

  // Constant stance at x0: only the apex height residual remains.
  Vec resting = Vec::Zero(5);
  resting(0) = 0.65;
  CHECK(cost.apex_cost.terminal(resting) == doctest::Approx(0.1225).epsilon(1e-15));
  CHECK(cost.settle_cost.terminal(resting) == 0.0);
}

TEST_CASE("unit input over the horizon adds exactly its effort integral") {
  const HopperTask task;  // effort weight 1.0
  const HopperCost cost = hopper_cost(task);
  const int n = 181;
  const RegularizedField field(hopper_system(HopperParams{}), make_quintic_transition(), 0.01);

  CostFunctional effort;
  effort.terminal = [](const Vec&) { return 0.0; };
  effort.terminal_grad = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  effort.running = [](const Vec&, const Vec& u) { return u.squaredNorm(); };
  effort.running_grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
  effort.running_grad_u = [](const Vec&, const Vec& u) { return Vec(2.0 * u); };
  const RegularizedField aug_field(
      augment_running_cost(hopper_system(HopperParams{}), effort).first,
      make_quintic_transition(), 0.01);

  ControlData zero = ControlData::constant(augment_initial_state(standing_state()),
                                           Vec::Zero(1), n - 1);
  ControlData ones = ControlData::constant(augment_initial_state(standing_state()),
                                           Vec::Ones(1), n - 1);
  const SensitivityBundle b0 = evaluate_hopper_objective(aug_field, cost, zero, n);
  const SensitivityBundle b1 = evaluate_hopper_objective(aug_field, cost, ones, n);

  // Subtracting the effort integral (h sum u^2 = 1.8 for unit input)
  // leaves only state residuals, recomputable from the 4-state flow.
  auto state_cost = [&](const Vec& u_value) {
    const Trajectory tr = integrate_smooth(
        field, ControlData::constant(standing_state(), u_value, n - 1), 1.8, n);
    const Vec apex = tr.states[100];
    const Vec fin = tr.final_state();
    return (apex(0) - 1.0) * (apex(0) - 1.0) + apex(1) * apex(1) +
           (fin(0) - 0.65) * (fin(0) - 0.65) + fin(1) * fin(1);
  };
  CHECK(b0.value == doctest::Approx(state_cost(Vec::Zero(1))).epsilon(1e-12));
  CHECK(b1.value - 1.8 == doctest::Approx(state_cost(Vec::Ones(1))).epsilon(1e-12));
}

TEST_CASE("apex must land on the grid") {
  const HopperTask task;
  CHECK(apex_grid_index(task, 181) == 100);
  CHECK(apex_grid_index(task, 19) == 10);
  // The 200-point grid from the writeup misses t_apex.
  CHECK_THROWS_AS(apex_grid_index(task, 200), TaskInfeasibleGrid);
}

TEST_CASE("chained objective gradient matches finite differences") {
  HopperTask task;
  task.effort_weight = 1e-2;
  const HopperCost cost = hopper_cost(task);

  CostFunctional effort;
  const double w = task.effort_weight;
  effort.terminal = [](const Vec&) { return 0.0; };
  effort.terminal_grad = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  effort.running = [w](const Vec&, const Vec& u) { return w * u.squaredNorm(); };
  effort.running_grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
  effort.running_grad_u = [w](const Vec&, const Vec& u) { return Vec(2.0 * w * u); };
  const RegularizedField aug_field(
      augment_running_cost(hopper_system(hopper_experiment_params()), effort).first,
      make_quintic_transition(), 0.01);

  const int n = 19;
  HopperTask small = task;  // same times, coarser grid (t_apex still on it)
  const HopperCost cost_small = hopper_cost(small);
  auto rng = make_rng(79);
  ControlData xi;
  xi.x0 = augment_initial_state(standing_state());
  for (int k = 0; k < n - 1; ++k) xi.u.push_back(random_vec(rng, 1, -2.0, 2.0));

  const SensitivityBundle adj = evaluate_hopper_objective(aug_field, cost_small, xi, n);
  const double lambda = 1e-6;
  for (int k = 0; k < n - 1; ++k) {
    ControlData plus = xi, minus = xi;
    plus.u[k](0) += lambda;
    minus.u[k](0) -= lambda;
    const double fd = (evaluate_hopper_objective(aug_field, cost_small, plus, n).value -
                       evaluate_hopper_objective(aug_field, cost_small, minus, n).value) /
                      (2.0 * lambda);
    CHECK(adj.grad_u[k](0) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("phase extraction groups interior runs and counts flights") {
  Trajectory traj;
  traj.times = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  traj.modes = {ModeLabel::D1, ModeLabel::D1, ModeLabel::CrossingSigma,
                ModeLabel::D2,  ModeLabel::CrossingSigma, ModeLabel::D1, ModeLabel::D1};
  traj.states.assign(7, Vec::Zero(1));
  traj.guard_values.assign(7, 0.0);
  traj.inputs.assign(6, Vec::Zero(1));

  const auto phases = extract_phases(traj);
  REQUIRE(phases.size() == 3);
  CHECK(phases[0].mode == ModeLabel::D1);
  CHECK(phases[1].mode == ModeLabel::D2);
  CHECK(phases[1].t_start == doctest::Approx(0.2));
  CHECK(phases[1].t_end == doctest::Approx(0.4));
  CHECK(phases[2].mode == ModeLabel::D1);
  CHECK(count_flight_phases_before(phases, 0.35) == 1);
  CHECK(count_flight_phases_before(phases, 0.1) == 0);
}

TEST_CASE("guard sign and mode labels agree along a replay") {
  const PiecewiseSmoothSystem sys = hopper_system(hopper_experiment_params());
  Vec x0(4);
  x0 << 1.0, 0.0, 0.75, 0.0;  // drop test
  const Trajectory traj = integrate_filippov(sys, ControlData::constant(x0, Vec::Zero(1), 1), 0.6);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.guard_values[i] > 1e-9) CHECK(traj.modes[i] == ModeLabel::D2);
    if (traj.guard_values[i] < -1e-9) CHECK(traj.modes[i] == ModeLabel::D1);
  }
}

TEST_CASE("short optimization run descends and stays feasible") {
  HopperTask task;
  task.effort_weight = 1e-2;
  HopperRunOptions opts;
  opts.schedule = {0.02};
  opts.solver.max_iter = 60;
  const HopperRunResult res = optimize_hopping(task, hopper_experiment_params(), opts);
  CHECK(res.report.cost_history.back() < res.report.cost_history.front());
  for (std::size_t i = 1; i < res.report.cost_history.size(); ++i) {
    CHECK(res.report.cost_history[i] <= res.report.cost_history[i - 1]);
  }
  for (const Vec& u : res.report.final_xi.u) {
    CHECK(u(0) >= task.u_lo);
    CHECK(u(0) <= task.u_hi);
  }
  CHECK(res.report.audit.has_value());
}

}  // TEST_SUITE
