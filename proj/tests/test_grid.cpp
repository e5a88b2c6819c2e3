#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hjnav/grid.hpp"

using namespace hjnav;

TEST_CASE("build_grid samples the terminal function at the nodes") {
  SUBCASE("psi on a 4D grid") {
    const SafetyProblemParams params;
    const GridProblem problem = make_safety_vi_grid(params, 5);
    const GridField field = build_grid(problem.axes, problem.terminal);
    // Node (0.5, 0, ...): the axis [-1,1] with 5 points contains 0.5 at index 3.
    std::vector<int> idx = {3, 2, 2, 2};
    CHECK(field.axes[0].coord(3) == doctest::Approx(0.5));
    const double v = field.values[field.flat_index(idx)];
    CHECK(v == doctest::Approx(0.5 - params.collision_radius));
  }

  SUBCASE("epigraph terminal max(phi - z, g)") {
    Double1DParams params;
    const GridProblem problem = make_double1d_epigraph_grid(params, 5);
    const GridField field = build_grid(problem.axes, problem.terminal);
    std::vector<int> idx = {0, 4, 2};  // z = 0, x = x_bound, v = 0
    const double x = params.x_bound;
    const double expected = std::max(std::abs(x - params.goal_x),
                                     params.obstacle_halfwidth -
                                         std::abs(x - params.obstacle_center));
    CHECK(field.values[field.flat_index(idx)] == doctest::Approx(expected));
  }

  SUBCASE("counts 3,3,3,3 give 81 values") {
    const GridProblem problem = make_safety_vi_grid(SafetyProblemParams{}, 3);
    const GridField field = build_grid(problem.axes, problem.terminal);
    CHECK(field.values.size() == 81);
  }

  SUBCASE("memory cap refusal reports the requirement") {
    const GridProblem problem = make_safety_vi_grid(SafetyProblemParams{}, 101);
    CHECK_THROWS_WITH_AS(build_grid(problem.axes, problem.terminal, 1024.0),
                         doctest::Contains("exceeds cap"), std::runtime_error);
  }
}

TEST_CASE("lf_step: zero Hamiltonian, Taylor step, clamp, CFL refusal") {
  SUBCASE("zero dynamics leave a constant field untouched") {
    GridProblem problem;
    problem.mode = GridMode::kReachVi;
    problem.axes = {GridAxis{-1, 1, 9}, GridAxis{-1, 1, 9}};
    problem.terminal = [](const double*) { return 0.7; };
    problem.clamp_fn = [](const double*) { return 10.0; };
    problem.hamiltonian = [](const double*, const double*) { return 0.0; };
    problem.alpha = {1.0, 1.0};
    const GridField field = build_grid(problem.axes, problem.terminal);
    const GridField next = lf_step(field, 0.01, problem);
    for (std::size_t i = 0; i < next.values.size(); ++i)
      CHECK(next.values[i] == doctest::Approx(0.7).epsilon(1e-15));
  }

  SUBCASE("one VI step approximates psi + dt * H at a smooth closing node") {
    const SafetyProblemParams params;
    const GridProblem problem = make_safety_vi_grid(params, 41);
    GridField field = build_grid(problem.axes, problem.terminal);
    field.time = params.horizon;
    const double dt = 0.001;
    const GridField next = lf_step(field, dt, problem);

    // Node (dx, dy, dvx, dvy) = (0.5, 0, -8, 0): closing head-on.
    std::vector<int> idx = {30, 20, 0, 20};
    CHECK(field.axes[0].coord(30) == doctest::Approx(0.5));
    CHECK(field.axes[2].coord(0) == doctest::Approx(-8.0));
    // grad psi = (1, 0, 0, 0); H = -8 + 2*a_max*(0+0) = -8. The only error
    // source is the dy-dissipation, dt * alpha * curvature * spacing / 2.
    const double expected = (0.5 - params.collision_radius) + dt * (-8.0);
    CHECK(std::abs(next.values[next.flat_index(idx)] - expected) <= 1e-3);
  }

  SUBCASE("clamp pins any update above psi back to psi (VI mode)") {
    const GridProblem problem = make_fleeing_vi_grid(1.0, 0.1, 1.0, 21);
    GridField field = build_grid(problem.axes, problem.terminal);
    const GridField next = lf_step(field, 0.01, problem);
    std::vector<double> x(2);
    for (std::size_t i = 0; i < next.values.size(); ++i) {
      next.node_coords(i, x.data());
      CHECK(next.values[i] <= problem.clamp_fn(x.data()) + 1e-15);
    }
  }

  SUBCASE("CFL violation is refused with the admissible dt") {
    const GridProblem problem = make_safety_vi_grid(SafetyProblemParams{}, 11);
    const GridField field = build_grid(problem.axes, problem.terminal);
    // spacing pos = 0.2, alpha = 8 -> max dt = 0.0125.
    CHECK_THROWS_WITH_AS(lf_step(field, 0.02, problem),
                         doctest::Contains("max admissible dt"), std::runtime_error);
    CHECK_NOTHROW(lf_step(field, 0.012, problem));
  }
}

TEST_CASE("interpolation: nodes exact, linear midpoints exact, clamped outside") {
  GridField field;
  field.axes = {GridAxis{0, 1, 3}, GridAxis{0, 2, 3}};
  field.values.resize(9);
  // Linear field f = 2x + 3y.
  std::vector<double> coords(2);
  for (std::size_t i = 0; i < 9; ++i) {
    field.node_coords(i, coords.data());
    field.values[i] = 2 * coords[0] + 3 * coords[1];
  }
  Eigen::Vector2d at_node(0.5, 1.0);
  CHECK(interpolate(field, at_node) == doctest::Approx(2 * 0.5 + 3 * 1.0));
  Eigen::Vector2d midpoint(0.25, 0.5);
  CHECK(interpolate(field, midpoint) == doctest::Approx(2 * 0.25 + 3 * 0.5));
  Eigen::Vector2d outside(-5.0, 1.0);
  CHECK(interpolate(field, outside) == doctest::Approx(3.0));  // clamps to x=0 face
}

TEST_CASE("compare: self comparison, constant offset, random net liveness") {
  const GridProblem problem = make_fleeing_vi_grid(1.0, 0.1, 1.0, 21);
  const GridField field = build_grid(problem.axes, problem.terminal);

  CompareSpec spec;
  spec.margin = 0.05;
  const CompareReport self = compare(
      field, [&](const Eigen::VectorXd& x) { return interpolate(field, x); }, spec);
  CHECK(self.sign_agreement_pct == doctest::Approx(100.0));
  CHECK(self.mae_confident == doctest::Approx(0.0));

  const CompareReport offset = compare(
      field, [&](const Eigen::VectorXd& x) { return interpolate(field, x) + 0.01; }, spec);
  CHECK(offset.mae_confident == doctest::Approx(0.01));

  Rng rng(3);
  const CompareReport random = compare(
      field, [&](const Eigen::VectorXd&) { return rng.uniform(-1, 1); }, spec);
  CHECK(random.n_points == static_cast<long>(field.values.size()));
  CHECK(std::isfinite(random.mae_confident));
}

TEST_CASE("fleeing solve: cooperative escape preserves psi where positive") {
  const double speed = 1.0, r = 0.15, bound = 1.0;
  const GridProblem problem = make_fleeing_vi_grid(speed, r, bound, 21);
  GridSolveOptions options;
  options.horizon = 0.2;
  const GridSolveResult result = solve_grid(problem, options);

  const double spacing = problem.axes[0].spacing();
  std::vector<double> x(2);
  double worst = 0.0;
  for (std::size_t i = 0; i < result.final_field.values.size(); ++i) {
    result.final_field.node_coords(i, x.data());
    const double psi_x = std::hypot(x[0], x[1]) - r;
    if (psi_x <= 0.0) continue;
    worst = std::max(worst, std::abs(result.final_field.values[i] - psi_x));
  }
  CHECK(worst <= 2.0 * spacing);
}

TEST_CASE("VI solve slices are clamped and monotone in time") {
  const SafetyProblemParams params;
  const GridProblem problem = make_safety_vi_grid(params, 11);
  GridSolveOptions options;
  options.horizon = params.horizon;
  options.store_times = {params.horizon, 0.1, 0.0};
  const GridSolveResult result = solve_grid(problem, options);
  REQUIRE(result.stored.size() == 3);

  // Terminal slice equals the sampled terminal function exactly.
  const GridField terminal = build_grid(problem.axes, problem.terminal);
  for (std::size_t i = 0; i < terminal.values.size(); ++i)
    CHECK(result.stored[0].values[i] == terminal.values[i]);

  std::vector<double> x(4);
  for (const GridField& slice : result.stored) {
    for (std::size_t i = 0; i < slice.values.size(); ++i) {
      slice.node_coords(i, x.data());
      CHECK(slice.values[i] <= problem.clamp_fn(x.data()) + 1e-12);
    }
  }
  // Earlier slices are node-wise <= later slices.
  for (std::size_t i = 0; i < result.stored[0].values.size(); ++i) {
    CHECK(result.stored[2].values[i] <= result.stored[1].values[i] + 1e-12);
    CHECK(result.stored[1].values[i] <= result.stored[0].values[i] + 1e-12);
  }
}

TEST_CASE("epigraph solve keeps V >= g node-wise") {
  Double1DParams params;
  const GridProblem problem = make_double1d_epigraph_grid(params, 21);
  GridSolveOptions options;
  options.horizon = params.horizon;
  options.store_times = {params.horizon / 2, 0.0};
  const GridSolveResult result = solve_grid(problem, options);
  std::vector<double> x(3);
  for (const GridField& slice : result.stored) {
    for (std::size_t i = 0; i < slice.values.size(); ++i) {
      slice.node_coords(i, x.data());
      CHECK(slice.values[i] >= problem.clamp_fn(x.data()) - 1e-12);
    }
  }
}

TEST_CASE("solution is invariant under dimension-order permutation") {
  // Same fleeing problem with (dx, dy) vs (dy, dx) axes.
  const GridProblem original = make_fleeing_vi_grid(1.0, 0.1, 1.0, 21);
  GridProblem permuted = original;
  permuted.hamiltonian = [](const double*, const double* pg) {
    return 2.0 * (std::abs(pg[1]) + std::abs(pg[0]));
  };
  permuted.terminal = [](const double* x) { return std::hypot(x[1], x[0]) - 0.1; };
  permuted.clamp_fn = permuted.terminal;

  GridSolveOptions options;
  options.horizon = 0.1;
  const GridSolveResult a = solve_grid(original, options);
  const GridSolveResult b = solve_grid(permuted, options);

  std::vector<int> idx(2);
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      idx = {i, j};
      const double va = a.final_field.values[a.final_field.flat_index(idx)];
      idx = {j, i};
      const double vb = b.final_field.values[b.final_field.flat_index(idx)];
      CHECK(va == doctest::Approx(vb).epsilon(1e-14));
    }
  }
}

TEST_CASE("grid dump round trip") {
  const GridProblem problem = make_fleeing_vi_grid(1.0, 0.1, 1.0, 9);
  GridField field = build_grid(problem.axes, problem.terminal);
  field.time = 0.125;
  save_grid("grid_roundtrip.bin", field);
  const GridField loaded = load_grid("grid_roundtrip.bin");
  CHECK(loaded.time == field.time);
  CHECK(loaded.axes.size() == field.axes.size());
  CHECK(loaded.values == field.values);
  std::filesystem::remove("grid_roundtrip.bin");

  CHECK_THROWS(load_grid("no_such_grid.bin"));
}
