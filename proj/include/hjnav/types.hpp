#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

namespace hjnav {

/// Planar double-integrator agent state.
struct AgentState {
  double px = 0.0;
  double py = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

/// Acceleration command, component-wise bounded by the arena accel bound.
struct ControlInput {
  double ax = 0.0;
  double ay = 0.0;
};

struct GoalSpec {
  double gx = 0.0;
  double gy = 0.0;
};

/// Physical bounds shared by the whole pipeline. Positions live in
/// [-pos_bound, pos_bound]^2, velocities in [-vel_bound, vel_bound]^2 and
/// accelerations in [-accel_bound, accel_bound]^2.
struct ArenaLimits {
  double pos_bound = 1.0;
  double vel_bound = 4.0;
  double accel_bound = 4.0;

  double domain_diagonal() const {
    const double side = 2.0 * pos_bound;
    return std::sqrt(2.0) * side;
  }
  /// Position given to virtual (padding) slots: far outside the arena so a
  /// virtual slot never trips the collision constraint.
  double far_coordinate() const { return 10.0 * pos_bound; }
};

/// One slot of a local observation: an agent state plus its goal.
/// Virtual slots stand in for absent neighbours; they sit at the far
/// coordinate with zero velocity and their goal on top of them, so they
/// contribute zero running cost and a huge separation.
struct ObsSlot {
  AgentState state;
  GoalSpec goal;
  bool is_virtual = false;
};

/// Fixed-layout local observation: ego first, then exactly n neighbour
/// slots in ranked order. Flattened length is (n+1)*6.
struct Observation {
  ObsSlot ego;
  std::vector<ObsSlot> neighbours;

  int slot_count() const { return static_cast<int>(neighbours.size()) + 1; }
  const ObsSlot& slot(int i) const { return i == 0 ? ego : neighbours[i - 1]; }
  ObsSlot& slot(int i) { return i == 0 ? ego : neighbours[i - 1]; }
};

/// Observation augmented with the remaining cost budget z >= 0.
struct AugmentedObservation {
  Observation obs;
  double z = 0.0;
};

/// Joint world state for simulation.
struct WorldState {
  std::vector<AgentState> agents;
  std::vector<GoalSpec> goals;
  double time = 0.0;

  int num_agents() const { return static_cast<int>(agents.size()); }
};

/// Navigation task constants shared by training and deployment.
struct TaskParams {
  double collision_radius = 0.1;    // minimum safe separation r
  double observation_radius = 0.5;  // neighbour visibility radius
  int num_neighbours = 2;           // n slots beside the ego
  double horizon = 0.2;             // planning horizon T in seconds
  double z_max_override = 0.0;      // 0 = use default_z_max

  /// Cost-budget ceiling. Upper-bounds the achievable trajectory cost so the
  /// epigraph search is never artificially infeasible:
  /// (n+1) * domain diagonal * (1 + T).
  double default_z_max(const ArenaLimits& limits) const {
    return (num_neighbours + 1) * limits.domain_diagonal() * (1.0 + horizon);
  }

  double resolved_z_max(const ArenaLimits& limits) const {
    return z_max_override > 0.0 ? z_max_override : default_z_max(limits);
  }
};

/// Neighbour index used to mark a padded (virtual) slot.
inline constexpr int kPadNeighbour = -1;

/// Sentinel returned by the constraint when fewer than two real agents are
/// present: far below any reachable separation value, so the constraint is
/// inactive.
inline constexpr double kNoConstraintSentinel = -10.0;

}  // namespace hjnav
