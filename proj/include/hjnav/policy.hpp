#pragma once

#include <functional>
#include <memory>

#include "hjnav/epigraph.hpp"
#include "hjnav/safety.hpp"
#include "hjnav/types.hpp"
#include "hjnav/value_net.hpp"

namespace hjnav {

/// Outcome of one receding-horizon decision.
struct PolicyDecision {
  bool feasible = false;
  double z_star = 0.0;          // meaningful only when feasible
  ControlInput ego_control;
  double value_at_z = 0.0;      // V_hat(0, o, z*) (or at z_max when infeasible)
  bool cost_branch_active = false;  // terminal branch at the decision point
  int search_iterations = 0;
  bool used_fallback = false;
};

struct ZSearchResult {
  bool feasible = false;
  double z_star = 0.0;
  double value_at_z = 0.0;
  int iterations = 0;
};

/// Binary search for the smallest budget with V_hat <= 0, assuming V_hat is
/// non-increasing in z. Returns the upper bracket end, which is guaranteed
/// feasible among evaluated points. value_of_z must be finite.
ZSearchResult z_search(const std::function<double(double)>& value_of_z, double z_max, double tol,
                       int max_iter = 30);

/// Convenience overload bound to the auxiliary net at (t, obs).
ZSearchResult z_search(const ExactBcNet& aux_net, double t, const Observation& obs, double z_max,
                       double tol, int max_iter = 30);

/// Greedy optimal control from the value gradient at the optimal budget:
/// u* = argmin <grad V_hat, f_hat>, per-axis sign rule. Returns the joint
/// control; callers apply only the ego block.
std::vector<ControlInput> optimal_control(const ExactBcNet& aux_net, double t,
                                          const Observation& obs, double z_star,
                                          const ArenaLimits& limits);

/// Pure safety maximization against the most dangerous real neighbour
/// (lowest pair risk): the ego control maximizing <grad V_s, f_s> restricted
/// to its own components. Zero control with no real neighbours.
ControlInput fallback_control(const ExactBcNet& safety_net, const SafetyReachProblem& problem,
                              const Observation& obs, const ArenaLimits& limits);

/// Models consulted by the per-step policy.
struct PolicyModels {
  std::shared_ptr<const ExactBcNet> aux_net;
  std::shared_ptr<const ExactBcNet> safety_net;
  std::shared_ptr<const SafetyReachProblem> safety_problem;
  std::shared_ptr<const NavigationEpigraphInstance> nav_instance;
};

struct PolicyConfig {
  double z_tol_fraction = 1e-4;  // tolerance = fraction * z_max
  int z_max_iter = 30;
};

/// One receding-horizon step for one agent given already selected
/// neighbours: build the observation, search z, extract the control
/// (falling back to safety maximization when infeasible). The horizon is
/// re-anchored at t = 0 each step.
PolicyDecision receding_step(const WorldState& world, int ego_index,
                             const std::vector<int>& neighbour_indices,
                             const PolicyModels& models, const PolicyConfig& config,
                             const ArenaLimits& limits);

}  // namespace hjnav
