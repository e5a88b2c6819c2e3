#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hjnav/checkpoint.hpp"
#include "hjnav/epigraph.hpp"
#include "hjnav/safety.hpp"
#include "test_util.hpp"

using namespace hjnav;

namespace {

NavigationEpigraphInstance nav_instance() {
  return NavigationEpigraphInstance(ArenaLimits{}, TaskParams{});
}

Arch nav_arch(const NavigationEpigraphInstance& instance) {
  Arch arch;
  arch.input_dim = instance.input_dim();
  arch.hidden = {16, 16};
  return arch;
}

AugmentedObservation random_aug(Rng& rng, const ArenaLimits& limits, double z_max) {
  return AugmentedObservation{testutil::random_observation(rng, limits, 2, 0.15),
                              rng.uniform(0.0, z_max)};
}

}  // namespace

TEST_CASE("terminal condition holds exactly for any parameters") {
  const auto instance = nav_instance();
  const ArenaLimits limits;
  const TaskParams task;
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const ExactBcNet net = instance.make_net(init_params(trial, nav_arch(instance)));
    for (int probe = 0; probe < 50; ++probe) {
      const AugmentedObservation aug = random_aug(rng, limits, instance.z_max());
      const EvalResult res = aux_value_eval(net, task.horizon, aug);
      const double expected = std::max(terminal_cost_phi(aug.obs) - aug.z,
                                       constraint_g(aug.obs, task.collision_radius));
      CHECK(res.value == expected);  // exact, not approximate
    }
  }
}

TEST_CASE("wrapper z-gradient follows the active terminal branch") {
  const auto instance = nav_instance();
  const TaskParams task;
  const ExactBcNet net = instance.make_net(init_params(5, nav_arch(instance)));

  Observation obs;
  obs.ego = ObsSlot{AgentState{0, 0, 0, 0}, GoalSpec{0.8, 0}, false};
  obs.neighbours.push_back(ObsSlot{AgentState{10, 10, 0, 0}, GoalSpec{10, 10}, true});
  obs.neighbours.push_back(ObsSlot{AgentState{10, 10, 0, 0}, GoalSpec{10, 10}, true});

  // phi = 0.8, g = sentinel -10. Cost branch active for z < 10.8.
  const EvalResult cost_branch = aux_value_eval(net, task.horizon, {obs, 0.3});
  CHECK(cost_branch.input_gradient[1] == doctest::Approx(-1.0));

  // Two close agents: g = 0.02; z large makes the obstacle branch active.
  obs.neighbours[0] =
      ObsSlot{AgentState{0.08, 0, 0, 0}, GoalSpec{0.08, 0}, false};
  const EvalResult g_branch = aux_value_eval(net, task.horizon, {obs, 9.0});
  CHECK(g_branch.input_gradient[1] == doctest::Approx(0.0));
}

namespace {

// Finite-difference check of the assembled physical gradient, skipping
// probes near the max kink, the min-distance tie, or a goal-distance kink.
void check_aux_gradient_fd(const ExactBcNet& net, const NavigationEpigraphInstance& instance,
                           Rng& rng, int probes) {
  const ArenaLimits limits;
  const TaskParams task;
  int done = 0;
  int guard = 0;
  while (done < probes && guard < probes * 50) {
    ++guard;
    const double t = rng.uniform(0.0, task.horizon * 0.95);
    const AugmentedObservation aug = random_aug(rng, limits, instance.z_max());
    Eigen::VectorXd q = nav_sample_from_observation(t, aug);

    const double phi = terminal_cost_phi(aug.obs);
    const double g = constraint_g(aug.obs, task.collision_radius);
    if (std::abs((phi - aug.z) - g) < 0.05) continue;  // max kink
    bool near_kink = false;
    for (int i = 0; i < aug.obs.slot_count(); ++i) {
      const ObsSlot& s = aug.obs.slot(i);
      if (!s.is_virtual && goal_distance(s.state, s.goal) < 0.05) near_kink = true;
    }
    if (near_kink) continue;

    const EvalResult res = net.evaluate(q);
    for (int i = 0; i < q.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, net.scaler().scale[i]);
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      if (i == 0 && (qp[0] > task.horizon || qm[0] < 0.0)) continue;
      const double fd = (net.value(qp) - net.value(qm)) / (2 * h);
      const double scale = std::max(0.05, std::abs(fd));
      CHECK(std::abs(res.input_gradient[i] - fd) / scale < 1e-4);
    }
    ++done;
  }
  REQUIRE(done == probes);
}

}  // namespace

TEST_CASE("aux gradient matches finite differences away from kinks") {
  const auto instance = nav_instance();
  const ExactBcNet net = instance.make_net(init_params(9, nav_arch(instance)));
  Rng rng(31);
  check_aux_gradient_fd(net, instance, rng, 40);
}

TEST_CASE("safety wrapper: exact terminal and finite-difference gradient") {
  const SafetyReachProblem problem(SafetyProblemParams{});
  Arch arch;
  arch.input_dim = 5;
  arch.hidden = {16, 16};

  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const ExactBcNet net = problem.make_net(init_params(trial + 100, arch));
    for (int probe = 0; probe < 100; ++probe) {
      const RelativeState rs{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-8, 8),
                             rng.uniform(-8, 8)};
      const EvalResult res = safety_value_eval(net, problem.params().horizon, rs);
      CHECK(res.value == psi(rs, problem.params().collision_radius));
    }
  }

  const ExactBcNet net = problem.make_net(init_params(55, arch));
  CHECK(safety_value_eval(net, problem.params().horizon, RelativeState{0.3, 0, 0, 0}).value ==
        doctest::Approx(0.2));

  // FD gradient at interior points away from the distance kink.
  int done = 0;
  while (done < 30) {
    const RelativeState rs{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9),
                           rng.uniform(-7, 7), rng.uniform(-7, 7)};
    if (std::hypot(rs.dx, rs.dy) < 0.1) continue;
    const double t = rng.uniform(0.0, problem.params().horizon * 0.95);
    Eigen::VectorXd q = safety_sample(t, rs);
    const EvalResult res = net.evaluate(q);
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-5 * std::max(1.0, problem.scaler().scale[i]);
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      if (i == 0 && (qp[0] > problem.params().horizon || qm[0] < 0.0)) continue;
      const double fd = (net.value(qp) - net.value(qm)) / (2 * h);
      const double scale = std::max(0.05, std::abs(fd));
      CHECK(std::abs(res.input_gradient[i] - fd) / scale < 1e-4);
    }
    ++done;
  }
}

TEST_CASE("evaluation is deterministic and rejects out-of-horizon times") {
  const auto instance = nav_instance();
  const ExactBcNet net = instance.make_net(init_params(8, nav_arch(instance)));
  Rng rng(41);
  const AugmentedObservation aug = random_aug(rng, ArenaLimits{}, instance.z_max());
  const EvalResult a = aux_value_eval(net, 0.1, aug);
  const EvalResult b = aux_value_eval(net, 0.1, aug);
  CHECK(a.value == b.value);
  CHECK(a.input_gradient == b.input_gradient);

  CHECK_THROWS_AS(aux_value_eval(net, -0.01, aug), std::invalid_argument);
  CHECK_THROWS_AS(aux_value_eval(net, 0.21, aug), std::invalid_argument);
}

TEST_CASE("checkpoint round trip preserves every aux evaluation bit-exactly") {
  const auto instance = nav_instance();
  const NetParams params = init_params(1234, nav_arch(instance));
  const ExactBcNet net = instance.make_net(params);

  const std::string path = "aux_roundtrip.ckpt";
  save_checkpoint(path, Checkpoint{params, instance.scaler()});
  const Checkpoint loaded = load_checkpoint(path);
  const ExactBcNet net2 = instance.make_net(loaded.params);

  Rng rng(4321);
  for (int probe = 0; probe < 100; ++probe) {
    const double t = rng.uniform(0.0, 0.2);
    const AugmentedObservation aug = random_aug(rng, ArenaLimits{}, instance.z_max());
    const EvalResult a = aux_value_eval(net, t, aug);
    const EvalResult b = aux_value_eval(net2, t, aug);
    CHECK(a.value == b.value);
    CHECK(a.input_gradient == b.input_gradient);
  }
  std::filesystem::remove(path);
}
