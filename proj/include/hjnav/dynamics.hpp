#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hjnav/types.hpp"

namespace hjnav {

/// Double-integrator derivative: [vx, vy, ax, ay].
Eigen::Vector4d agent_derivative(const AgentState& s, const ControlInput& u);

/// Collision constraint g = r - min pairwise distance over real slots.
/// Positive iff some pair is closer than r. With fewer than two real agents
/// returns kNoConstraintSentinel.
double constraint_g(const Observation& obs, double r);

/// Running cost: sum of goal distances over ego and all real neighbour
/// slots. Virtual slots contribute zero.
double running_cost_l(const Observation& obs);

/// Terminal cost; same goal-distance aggregation as the running cost.
double terminal_cost_phi(const Observation& obs);

/// Derivative of the augmented observation [slots..., z]:
/// per-slot double-integrator dynamics (virtual slots frozen) followed by
/// zdot = -running_cost_l. u_joint must hold one entry per slot.
/// Returned layout: slot0 state derivative, slot1, ..., zdot (4*(n+1)+1).
Eigen::VectorXd augmented_derivative(const AugmentedObservation& aug,
                                     const std::vector<ControlInput>& u_joint);

/// Builds the fixed-layout observation for one agent. neighbour_indices has
/// exactly n entries; kPadNeighbour marks virtual slots. Throws
/// std::invalid_argument on duplicate/out-of-range indices.
Observation build_observation(const WorldState& world, int ego_index,
                              const std::vector<int>& neighbour_indices,
                              const ArenaLimits& limits);

/// Classical RK4 step. f must be pure; throws std::runtime_error if the
/// derivative produces non-finite values.
template <class F>
Eigen::VectorXd rk4_step(F&& f, const Eigen::VectorXd& x, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(x + dt * k3);
  if (!k1.allFinite() || !k2.allFinite() || !k3.allFinite() || !k4.allFinite())
    throw std::runtime_error("rk4_step: non-finite derivative");
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step of a single agent under constant control (exact for the
/// double integrator).
AgentState step_agent(const AgentState& s, const ControlInput& u, double dt);

inline double goal_distance(const AgentState& s, const GoalSpec& g) {
  const double dx = s.px - g.gx;
  const double dy = s.py - g.gy;
  return std::sqrt(dx * dx + dy * dy);
}

inline double agent_distance(const AgentState& a, const AgentState& b) {
  const double dx = a.px - b.px;
  const double dy = a.py - b.py;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace hjnav
