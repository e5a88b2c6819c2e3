#include "hjnav/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hjnav/dynamics.hpp"

namespace hjnav {

namespace {
double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("z_search: non-finite ") + what);
}
}  // namespace

ZSearchResult z_search(const std::function<double(double)>& value_of_z, double z_max, double tol,
                       int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("z_search: tol must be positive");
  ZSearchResult result;

  const double v0 = value_of_z(0.0);
  check_finite(v0, "value at z=0");
  if (v0 <= 0.0) {
    result.feasible = true;
    result.z_star = 0.0;
    result.value_at_z = v0;
    return result;
  }
  const double v_top = value_of_z(z_max);
  check_finite(v_top, "value at z_max");
  if (v_top > 0.0) {
    result.feasible = false;
    result.value_at_z = v_top;
    return result;
  }

  // Invariant: value(lo) > 0, value(hi) <= 0.
  double lo = 0.0, hi = z_max;
  double v_hi = v_top;
  int it = 0;
  while (it < max_iter && (hi - lo) > tol) {
    const double mid = 0.5 * (lo + hi);
    const double v_mid = value_of_z(mid);
    check_finite(v_mid, "value at midpoint");
    if (v_mid <= 0.0) {
      hi = mid;
      v_hi = v_mid;
    } else {
      lo = mid;
    }
    ++it;
  }
  result.feasible = true;
  result.z_star = hi;
  result.value_at_z = v_hi;
  result.iterations = it;
  return result;
}

ZSearchResult z_search(const ExactBcNet& aux_net, double t, const Observation& obs, double z_max,
                       double tol, int max_iter) {
  Eigen::VectorXd q = nav_sample_from_observation(t, AugmentedObservation{obs, 0.0});
  return z_search(
      [&](double z) {
        q[1] = z;
        return aux_net.value(q);
      },
      z_max, tol, max_iter);
}

std::vector<ControlInput> optimal_control(const ExactBcNet& aux_net, double t,
                                          const Observation& obs, double z_star,
                                          const ArenaLimits& limits) {
  const AugmentedObservation aug{obs, z_star};
  const EvalResult eval = aux_value_eval(aux_net, t, aug);
  const HamiltonianMin h =
      hamiltonian_min(eval.input_gradient.tail(eval.input_gradient.size() - 1), aug, limits);
  return h.controls;
}

ControlInput fallback_control(const ExactBcNet& safety_net, const SafetyReachProblem& problem,
                              const Observation& obs, const ArenaLimits& limits) {
  // Most dangerous neighbour = lowest safety value at full horizon.
  int worst = -1;
  double worst_risk = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obs.neighbours.size(); ++i) {
    const ObsSlot& nb = obs.neighbours[i];
    if (nb.is_virtual) continue;
    const double risk = pair_risk(safety_net, problem, obs.ego.state, nb.state, 0.0);
    if (risk < worst_risk) {
      worst_risk = risk;
      worst = static_cast<int>(i);
    }
  }
  if (worst < 0) return ControlInput{0.0, 0.0};

  const AgentState& other = obs.neighbours[worst].state;
  const RelativeState rel = problem.clamp_to_box(
      RelativeState{other.px - obs.ego.state.px, other.py - obs.ego.state.py,
                    other.vx - obs.ego.state.vx, other.vy - obs.ego.state.vy});
  const EvalResult eval = safety_value_eval(safety_net, 0.0, rel);
  // Relative state is other - ego, so the ego enters f_s with negative
  // sign; maximizing its share flips the velocity-gradient sign rule.
  const double gvx = eval.input_gradient[3];
  const double gvy = eval.input_gradient[4];
  return ControlInput{-limits.accel_bound * sign_of(gvx), -limits.accel_bound * sign_of(gvy)};
}

PolicyDecision receding_step(const WorldState& world, int ego_index,
                             const std::vector<int>& neighbour_indices,
                             const PolicyModels& models, const PolicyConfig& config,
                             const ArenaLimits& limits) {
  const Observation obs = build_observation(world, ego_index, neighbour_indices, limits);
  const double z_max = models.nav_instance->z_max();
  const double tol = config.z_tol_fraction * z_max;

  PolicyDecision decision;
  const ZSearchResult zr = z_search(*models.aux_net, 0.0, obs, z_max, tol, config.z_max_iter);
  decision.feasible = zr.feasible;
  decision.search_iterations = zr.iterations;
  decision.value_at_z = zr.value_at_z;

  if (zr.feasible) {
    decision.z_star = zr.z_star;
    const std::vector<ControlInput> joint =
        optimal_control(*models.aux_net, 0.0, obs, zr.z_star, limits);
    decision.ego_control = joint[0];
    const double phi = terminal_cost_phi(obs);
    const double g = constraint_g(obs, models.nav_instance->task().collision_radius);
    decision.cost_branch_active = (phi - zr.z_star) >= g;
  } else {
    decision.used_fallback = true;
    decision.ego_control =
        fallback_control(*models.safety_net, *models.safety_problem, obs, limits);
  }
  return decision;
}

}  // namespace hjnav
