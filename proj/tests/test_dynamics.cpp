#include <doctest.h>

#include <cmath>

#include "hjnav/dynamics.hpp"
#include "test_util.hpp"

using namespace hjnav;

TEST_CASE("agent_derivative is [vx, vy, ax, ay]") {
  const Eigen::Vector4d d =
      agent_derivative(AgentState{0.2, -0.3, 1.0, 2.0}, ControlInput{0.5, -1.0});
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 2.0);
  CHECK(d[2] == 0.5);
  CHECK(d[3] == -1.0);

  const Eigen::Vector4d rest = agent_derivative(AgentState{}, ControlInput{});
  CHECK(rest.isZero());

  const Eigen::Vector4d at_bounds =
      agent_derivative(AgentState{1, 1, -4, 4}, ControlInput{4, -4});
  CHECK(at_bounds == Eigen::Vector4d(-4, 4, 4, -4));
}

namespace {

Observation two_agent_obs(double x1, double y1, double x2, double y2) {
  Observation obs;
  obs.ego = ObsSlot{AgentState{x1, y1, 0, 0}, GoalSpec{x1, y1}, false};
  obs.neighbours.push_back(ObsSlot{AgentState{x2, y2, 0, 0}, GoalSpec{x2, y2}, false});
  return obs;
}

}  // namespace

TEST_CASE("constraint_g measures r minus closest pair") {
  CHECK(constraint_g(two_agent_obs(0, 0, 0.1, 0), 0.1) == doctest::Approx(0.0));
  CHECK(constraint_g(two_agent_obs(0, 0, 0.5, 0), 0.1) == doctest::Approx(-0.4));

  Observation three = two_agent_obs(0, 0, 0.05, 0);
  three.neighbours.push_back(ObsSlot{AgentState{0.5, 0.5, 0, 0}, GoalSpec{0.5, 0.5}, false});
  CHECK(constraint_g(three, 0.1) == doctest::Approx(0.05));
}

TEST_CASE("constraint_g with fewer than two real agents is the sentinel") {
  Observation obs;
  obs.ego = ObsSlot{AgentState{0, 0, 0, 0}, GoalSpec{0, 0}, false};
  obs.neighbours.push_back(ObsSlot{AgentState{10, 10, 0, 0}, GoalSpec{10, 10}, true});
  CHECK(constraint_g(obs, 0.1) == kNoConstraintSentinel);
  CHECK_THROWS_AS(constraint_g(obs, -1.0), std::invalid_argument);
}

TEST_CASE("running cost sums real-slot goal distances") {
  Observation obs;
  obs.ego = ObsSlot{AgentState{0, 0, 0, 0}, GoalSpec{1, 0}, false};
  obs.neighbours.push_back(ObsSlot{AgentState{0.3, 0.3, 0, 0}, GoalSpec{0.3, 0.3}, false});
  obs.neighbours.push_back(ObsSlot{AgentState{-0.2, 0.4, 0, 0}, GoalSpec{-0.2, 0.4}, false});
  CHECK(running_cost_l(obs) == doctest::Approx(1.0));

  obs.neighbours[0].goal = GoalSpec{0.3, 0.8};   // distance 0.5
  obs.neighbours[1].goal = GoalSpec{0.05, 0.4};  // distance 0.25
  CHECK(running_cost_l(obs) == doctest::Approx(1.75));
  CHECK(terminal_cost_phi(obs) == doctest::Approx(1.75));

  // All at goals.
  Observation done;
  done.ego = ObsSlot{AgentState{0.4, 0.4, 0, 0}, GoalSpec{0.4, 0.4}, false};
  CHECK(running_cost_l(done) == doctest::Approx(0.0));
  CHECK(terminal_cost_phi(done) == doctest::Approx(0.0));

  Observation single;
  single.ego = ObsSlot{AgentState{0, 0, 0, 0}, GoalSpec{2, 0}, false};
  CHECK(terminal_cost_phi(single) == doctest::Approx(2.0));
}

TEST_CASE("augmented_derivative stacks slot dynamics and depletes z") {
  Observation obs;
  obs.ego = ObsSlot{AgentState{0, 0, 1, -1}, GoalSpec{0, 0}, false};
  obs.neighbours.push_back(ObsSlot{AgentState{0.5, 0, 0, 0}, GoalSpec{0.5, 0}, false});
  obs.neighbours.push_back(
      ObsSlot{AgentState{10, 10, 0, 0}, GoalSpec{10, 10}, true});  // virtual
  AugmentedObservation aug{obs, 1.0};

  std::vector<ControlInput> u{{2, 3}, {0, 0}, {4, 4}};
  const Eigen::VectorXd d = augmented_derivative(aug, u);
  REQUIRE(d.size() == 13);
  CHECK(d.segment<4>(0) == Eigen::Vector4d(1, -1, 2, 3));
  CHECK(d.segment<4>(4) == Eigen::Vector4d(0, 0, 0, 0));
  CHECK(d.segment<4>(8).isZero());  // virtual slot ignores its control
  CHECK(d[12] == doctest::Approx(0.0));  // everyone at their goal

  obs.ego.goal = GoalSpec{2.5, 0};  // ego distance 2.5
  AugmentedObservation aug2{obs, 1.0};
  const Eigen::VectorXd d2 = augmented_derivative(aug2, u);
  CHECK(d2[12] == doctest::Approx(-2.5));

  CHECK_THROWS_AS(augmented_derivative(aug, {{0, 0}}), std::invalid_argument);
}

TEST_CASE("build_observation layout, padding and errors") {
  ArenaLimits limits;
  WorldState world;
  world.agents = {AgentState{0, 0, 1, 1}, AgentState{0.2, 0, 0, 0}, AgentState{0, 0.3, 0, 0}};
  world.goals = {GoalSpec{1, 1}, GoalSpec{0.5, 0}, GoalSpec{0, -0.5}};

  const Observation obs = build_observation(world, 0, {1, 2}, limits);
  CHECK(obs.ego.state.px == 0.0);
  CHECK(obs.ego.goal.gx == 1.0);
  CHECK(obs.neighbours[0].state.px == doctest::Approx(0.2));
  CHECK(obs.neighbours[1].state.py == doctest::Approx(0.3));
  CHECK_FALSE(obs.neighbours[0].is_virtual);

  const Observation padded = build_observation(world, 0, {1, kPadNeighbour}, limits);
  CHECK(padded.neighbours[1].is_virtual);
  CHECK(padded.neighbours[1].state.px == doctest::Approx(10.0));
  CHECK(padded.neighbours[1].state.vx == 0.0);
  CHECK(padded.neighbours[1].goal.gx == doctest::Approx(10.0));

  const Observation ego2 = build_observation(world, 2, {0, 1}, limits);
  CHECK(ego2.ego.state.py == doctest::Approx(0.3));

  CHECK_THROWS_AS(build_observation(world, 0, {1, 1}, limits), std::invalid_argument);
  CHECK_THROWS_AS(build_observation(world, 0, {1, 7}, limits), std::invalid_argument);
  CHECK_THROWS_AS(build_observation(world, 0, {0, 1}, limits), std::invalid_argument);
}

TEST_CASE("rk4 is exact for constants and ~5th order locally") {
  Eigen::VectorXd x0(2);
  x0 << 1.0, -2.0;
  const Eigen::VectorXd still =
      rk4_step([](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); }, x0, 0.3);
  CHECK(still == x0);

  Eigen::VectorXd c(2);
  c << 0.7, -0.1;
  const Eigen::VectorXd moved =
      rk4_step([&](const Eigen::VectorXd&) { return c; }, x0, 0.25);
  CHECK((moved - (x0 + 0.25 * c)).norm() == doctest::Approx(0.0));

  // xdot = x starting at 1: analytic e^0.1.
  Eigen::VectorXd one(1);
  one << 1.0;
  const Eigen::VectorXd grown =
      rk4_step([](const Eigen::VectorXd& x) { return x; }, one, 0.1);
  CHECK(grown[0] == doctest::Approx(1.105170918).epsilon(1e-7));

  CHECK_THROWS_AS(
      rk4_step([](const Eigen::VectorXd& x) { return x; }, one, 0.0), std::invalid_argument);
  Eigen::VectorXd nan_state(1);
  nan_state << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rk4_step([](const Eigen::VectorXd& x) { return x; }, nan_state, 0.1),
                  std::runtime_error);
}

TEST_CASE("rk4 observed convergence order >= 3.8 on a smooth nonlinear ODE") {
  // xdot = sin(x) + 0.5 x, integrated over [0, 1]; reference via tiny steps.
  auto f = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd d(1);
    d[0] = std::sin(x[0]) + 0.5 * x[0];
    return d;
  };
  auto integrate = [&](double dt) {
    Eigen::VectorXd x(1);
    x << 0.4;
    const int steps = static_cast<int>(std::llround(1.0 / dt));
    for (int i = 0; i < steps; ++i) x = rk4_step(f, x, dt);
    return x[0];
  };
  const double reference = integrate(1.0 / 16384.0);

  std::vector<double> dts = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errs;
  for (double dt : dts) errs.push_back(std::abs(integrate(dt) - reference));

  // Log-log slope over successive halvings.
  double slope_sum = 0.0;
  for (std::size_t i = 1; i < errs.size(); ++i)
    slope_sum += std::log2(errs[i - 1] / errs[i]);
  const double order = slope_sum / (errs.size() - 1);
  CHECK(order >= 3.8);
}

TEST_CASE("constraint sign iff some pair within r, on random observations") {
  ArenaLimits limits;
  Rng rng(7);
  const double r = 0.1;
  for (int trial = 0; trial < 500; ++trial) {
    const Observation obs = testutil::random_observation(rng, limits, 2, 0.2);
    int real = obs.ego.is_virtual ? 0 : 1;
    double min_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < obs.slot_count(); ++i) {
      if (obs.slot(i).is_virtual) continue;
      for (int j = i + 1; j < obs.slot_count(); ++j) {
        if (obs.slot(j).is_virtual) continue;
        min_dist = std::min(min_dist, agent_distance(obs.slot(i).state, obs.slot(j).state));
      }
    }
    for (const ObsSlot& nb : obs.neighbours) real += nb.is_virtual ? 0 : 1;
    const double g = constraint_g(obs, r);
    if (real < 2) {
      CHECK(g == kNoConstraintSentinel);
    } else {
      CHECK((g > 0.0) == (min_dist < r));
    }
  }
}

TEST_CASE("costs are Lipschitz in positions with constant slots+1") {
  ArenaLimits limits;
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Observation a = testutil::random_observation(rng, limits, 2);
    Observation b = a;
    double shift_norm = 0.0;
    for (int i = 0; i < b.slot_count(); ++i) {
      const double dx = rng.uniform(-0.2, 0.2);
      const double dy = rng.uniform(-0.2, 0.2);
      b.slot(i).state.px += dx;
      b.slot(i).state.py += dy;
      shift_norm += std::sqrt(dx * dx + dy * dy);
    }
    CHECK(running_cost_l(a) >= 0.0);
    CHECK(std::abs(running_cost_l(a) - running_cost_l(b)) <= shift_norm + 1e-12);
  }
}

TEST_CASE("z depletion equals minus running cost on random inputs") {
  ArenaLimits limits;
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    AugmentedObservation aug{testutil::random_observation(rng, limits, 2, 0.3),
                             rng.uniform(0.0, 5.0)};
    std::vector<ControlInput> u(3);
    for (auto& c : u) c = ControlInput{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const Eigen::VectorXd d = augmented_derivative(aug, u);
    CHECK(d[d.size() - 1] == doctest::Approx(-running_cost_l(aug.obs)).epsilon(1e-12));
  }
}

TEST_CASE("neighbour permutation leaves constraint and cost unchanged") {
  ArenaLimits limits;
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Observation obs = testutil::random_observation(rng, limits, 3, 0.2);
    Observation perm = obs;
    std::swap(perm.neighbours[0], perm.neighbours[2]);
    CHECK(constraint_g(obs, 0.1) == constraint_g(perm, 0.1));
    CHECK(running_cost_l(obs) == running_cost_l(perm));
  }
}
