#include "hjnav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjnav {

Eigen::Vector4d agent_derivative(const AgentState& s, const ControlInput& u) {
  return Eigen::Vector4d(s.vx, s.vy, u.ax, u.ay);
}

double constraint_g(const Observation& obs, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("constraint_g: r must be positive");
  const int n = obs.slot_count();
  double min_dist = std::numeric_limits<double>::infinity();
  int real_agents = 0;
  for (int i = 0; i < n; ++i) {
    if (obs.slot(i).is_virtual) continue;
    ++real_agents;
    for (int j = i + 1; j < n; ++j) {
      if (obs.slot(j).is_virtual) continue;
      min_dist = std::min(min_dist, agent_distance(obs.slot(i).state, obs.slot(j).state));
    }
  }
  if (real_agents < 2) return kNoConstraintSentinel;
  return r - min_dist;
}

double running_cost_l(const Observation& obs) {
  // Summed in sorted order so the result is exactly invariant under
  // neighbour-slot permutations.
  std::vector<double> terms;
  terms.reserve(obs.slot_count());
  for (int i = 0; i < obs.slot_count(); ++i) {
    const ObsSlot& s = obs.slot(i);
    if (s.is_virtual) continue;
    terms.push_back(goal_distance(s.state, s.goal));
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

double terminal_cost_phi(const Observation& obs) { return running_cost_l(obs); }

Eigen::VectorXd augmented_derivative(const AugmentedObservation& aug,
                                     const std::vector<ControlInput>& u_joint) {
  const int slots = aug.obs.slot_count();
  if (static_cast<int>(u_joint.size()) != slots)
    throw std::invalid_argument("augmented_derivative: one control per slot required");
  Eigen::VectorXd d(4 * slots + 1);
  for (int i = 0; i < slots; ++i) {
    const ObsSlot& s = aug.obs.slot(i);
    if (s.is_virtual) {
      d.segment<4>(4 * i).setZero();
    } else {
      d.segment<4>(4 * i) = agent_derivative(s.state, u_joint[i]);
    }
  }
  d[4 * slots] = -running_cost_l(aug.obs);
  return d;
}

Observation build_observation(const WorldState& world, int ego_index,
                              const std::vector<int>& neighbour_indices,
                              const ArenaLimits& limits) {
  const int N = world.num_agents();
  if (ego_index < 0 || ego_index >= N)
    throw std::invalid_argument("build_observation: ego index out of range");

  Observation obs;
  obs.ego.state = world.agents[ego_index];
  obs.ego.goal = world.goals[ego_index];
  obs.ego.is_virtual = false;

  const double far = limits.far_coordinate();
  obs.neighbours.reserve(neighbour_indices.size());
  for (std::size_t k = 0; k < neighbour_indices.size(); ++k) {
    const int idx = neighbour_indices[k];
    ObsSlot slot;
    if (idx == kPadNeighbour) {
      slot.state = AgentState{far, far, 0.0, 0.0};
      slot.goal = GoalSpec{far, far};
      slot.is_virtual = true;
    } else {
      if (idx < 0 || idx >= N)
        throw std::invalid_argument("build_observation: neighbour index out of range");
      if (idx == ego_index)
        throw std::invalid_argument("build_observation: neighbour equals ego");
      for (std::size_t m = 0; m < k; ++m)
        if (neighbour_indices[m] == idx)
          throw std::invalid_argument("build_observation: duplicate neighbour index");
      slot.state = world.agents[idx];
      slot.goal = world.goals[idx];
      slot.is_virtual = false;
    }
    obs.neighbours.push_back(slot);
  }
  return obs;
}

AgentState step_agent(const AgentState& s, const ControlInput& u, double dt) {
  Eigen::VectorXd x(4);
  x << s.px, s.py, s.vx, s.vy;
  const Eigen::VectorXd next = rk4_step(
      [&u](const Eigen::VectorXd& v) {
        Eigen::VectorXd d(4);
        d << v[2], v[3], u.ax, u.ay;
        return d;
      },
      x, dt);
  return AgentState{next[0], next[1], next[2], next[3]};
}

}  // namespace hjnav
