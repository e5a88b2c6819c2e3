#include <doctest.h>

#include <cmath>

#include "hjnav/safety.hpp"
#include "hjnav/training.hpp"

using namespace hjnav;

namespace {

Arch safety_arch(std::vector<int> hidden = {24, 24}) {
  Arch arch;
  arch.input_dim = 5;
  arch.hidden = std::move(hidden);
  return arch;
}

}  // namespace

TEST_CASE("relative dynamics: velocity stacking and control difference") {
  const Eigen::Vector4d d =
      relative_derivative(RelativeState{1, 0, -2, 0}, ControlInput{4, 0}, ControlInput{-4, 0});
  CHECK(d == Eigen::Vector4d(-2, 0, 8, 0));

  const Eigen::Vector4d same =
      relative_derivative(RelativeState{0.3, 0.1, 0.5, -0.5}, ControlInput{2, -1},
                          ControlInput{2, -1});
  CHECK(same[2] == 0.0);
  CHECK(same[3] == 0.0);

  const Eigen::Vector4d still = relative_derivative(RelativeState{1, 1, 0, 0}, {}, {});
  CHECK(still.isZero());
}

TEST_CASE("psi is the signed separation margin") {
  CHECK(psi(RelativeState{0.3, 0, 0, 0}, 0.1) == doctest::Approx(0.2));
  CHECK(psi(RelativeState{0, 0, 3, -3}, 0.1) == doctest::Approx(-0.1));
  CHECK(psi(RelativeState{0.06, 0.08, 0, 0}, 0.1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(psi(RelativeState{}, 0.0), std::invalid_argument);
}

TEST_CASE("safety Hamiltonian: joint cooperative maximum") {
  SUBCASE("velocity-gradient example") {
    const Eigen::Vector4d grad(0, 0, 0.5, -0.25);
    const SafetyHamiltonianMax h = safety_hamiltonian_max(grad, RelativeState{}, 4.0);
    CHECK(h.value == doctest::Approx(6.0));
    CHECK(h.u_i.ax == doctest::Approx(4.0));
    CHECK(h.u_j.ax == doctest::Approx(-4.0));
  }

  SUBCASE("zero gradient gives zero") {
    const SafetyHamiltonianMax h =
        safety_hamiltonian_max(Eigen::Vector4d::Zero(), RelativeState{1, 1, 1, 1}, 4.0);
    CHECK(h.value == 0.0);
    CHECK(h.u_i.ax == 0.0);
  }

  SUBCASE("upper bound over random controls and exact 9-point joint grid") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const RelativeState rs{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-8, 8),
                             rng.uniform(-8, 8)};
      Eigen::Vector4d grad;
      for (int i = 0; i < 4; ++i) grad[i] = rng.uniform(-1, 1);
      const SafetyHamiltonianMax h = safety_hamiltonian_max(grad, rs, 4.0);

      for (int draw = 0; draw < 20; ++draw) {
        const ControlInput ui{rng.uniform(-4, 4), rng.uniform(-4, 4)};
        const ControlInput uj{rng.uniform(-4, 4), rng.uniform(-4, 4)};
        CHECK(h.value >= grad.dot(relative_derivative(rs, ui, uj)) - 1e-9);
      }

      double best = -std::numeric_limits<double>::infinity();
      const auto level = [](int idx) { return -4.0 + idx * 1.0; };
      for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b)
          for (int c = 0; c < 9; ++c)
            for (int d = 0; d < 9; ++d)
              best = std::max(best,
                              grad.dot(relative_derivative(
                                  rs, ControlInput{level(a), level(b)},
                                  ControlInput{level(c), level(d)})));
      CHECK(std::abs(h.value - best) <= 1e-9);
    }
  }
}

TEST_CASE("VI residual: terminal structure, FD recomputation, non-negativity") {
  const SafetyReachProblem problem(SafetyProblemParams{});
  const ExactBcNet net = problem.make_net(init_params(3, safety_arch()));
  Rng rng(14);

  SUBCASE("at t=T the target branch pins the residual to |min(A, 0)|") {
    for (int probe = 0; probe < 100; ++probe) {
      const RelativeState rs{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-8, 8),
                             rng.uniform(-8, 8)};
      const Eigen::VectorXd q = safety_sample(problem.params().horizon, rs);
      const EvalResult r = net.residual(q);
      const double loss = problem.residual_loss(q, r.value, r.input_gradient, nullptr, nullptr);

      const EvalResult full = net.evaluate(q);
      const SafetyHamiltonianMax h = safety_hamiltonian_max(
          full.input_gradient.tail<4>(), rs, problem.params().accel_bound);
      const double branch_a = full.input_gradient[0] + h.value;
      CHECK(loss == doctest::Approx(std::abs(std::min(branch_a, 0.0))).epsilon(1e-9));
    }
  }

  SUBCASE("residual matches a finite-difference recomputation") {
    int done = 0;
    while (done < 40) {
      const RelativeState rs{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9),
                             rng.uniform(-7, 7), rng.uniform(-7, 7)};
      if (std::hypot(rs.dx, rs.dy) < 0.05) continue;
      const double t = rng.uniform(0.0, problem.params().horizon * 0.9);
      const Eigen::VectorXd q = safety_sample(t, rs);
      const EvalResult r = net.residual(q);
      const double loss = problem.residual_loss(q, r.value, r.input_gradient, nullptr, nullptr);

      const double h = 1e-5;
      Eigen::VectorXd qp = q, qm = q;
      qp[0] += h;
      qm[0] -= h;
      const double dt_v = (net.value(qp) - net.value(qm)) / (2 * h);
      const EvalResult full = net.evaluate(q);
      const SafetyHamiltonianMax ham = safety_hamiltonian_max(
          full.input_gradient.tail<4>(), rs, problem.params().accel_bound);
      const double expected =
          std::abs(std::min(dt_v + ham.value,
                            psi(rs, problem.params().collision_radius) - full.value));
      CHECK(loss == doctest::Approx(expected).epsilon(1e-3));
      ++done;
    }
  }

  SUBCASE("loss non-negative") {
    Rng local(4);
    const CollocationBatch batch =
        sample_collocation(local, 0.0, problem.params().horizon, problem, 256);
    CHECK(vi_residual_loss(problem, net.params(), batch) >= 0.0);
  }
}

TEST_CASE("safety training smoke runs and is deterministic") {
  const SafetyReachProblem problem(SafetyProblemParams{});
  const NetParams initial = init_params(6, safety_arch());

  TrainOptions opt;
  opt.curriculum.iterations = 150;
  opt.curriculum.batch_size = 64;
  opt.curriculum.seed = 2;
  opt.adam.lr = 1e-4;
  opt.log_interval = 25;
  opt.log_timing = false;
  opt.workers = 1;

  const TrainOutcome a = train_residual_net(problem, opt, initial);
  CHECK_FALSE(a.nan_abort);
  for (const TrainLogRow& row : a.log) CHECK(std::isfinite(row.loss));

  const TrainOutcome b = train_residual_net(problem, opt, initial);
  CHECK(train_log_csv(a.log) == train_log_csv(b.log));
}

TEST_CASE("pair risk: exact boundary value, symmetry at T, clamping") {
  const SafetyReachProblem problem(SafetyProblemParams{});
  const ExactBcNet net = problem.make_net(init_params(19, safety_arch()));

  const AgentState ego{0.0, 0.0, 1.0, 0.0};
  const AgentState other{0.3, 0.0, 1.0, 0.0};
  CHECK(pair_risk(net, problem, ego, other, problem.params().horizon) == doctest::Approx(0.2));

  // psi depends only on distance, so swapping the pair matches at t = T.
  CHECK(pair_risk(net, problem, ego, other, problem.params().horizon) ==
        doctest::Approx(pair_risk(net, problem, other, ego, problem.params().horizon)));

  // Far pair: the relative state clamps to the box and stays finite.
  const AgentState far{40.0, -35.0, 3.0, 3.0};
  const double risk = pair_risk(net, problem, ego, far, 0.0);
  CHECK(std::isfinite(risk));
  const RelativeState clamped = problem.clamp_to_box(
      RelativeState{far.px - ego.px, far.py - ego.py, far.vx - ego.vx, far.vy - ego.vy});
  CHECK(clamped.dx == problem.params().rel_pos_bound);
  CHECK(clamped.dy == -problem.params().rel_pos_bound);
}
