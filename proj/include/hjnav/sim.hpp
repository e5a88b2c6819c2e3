#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjnav/policy.hpp"
#include "hjnav/types.hpp"

namespace hjnav {

enum class NeighbourStrategy { kValue, kNearest, kRandom };

NeighbourStrategy neighbour_strategy_from_string(const std::string& name);
std::string to_string(NeighbourStrategy s);

struct ScenarioConfig {
  int num_agents = 3;
  double control_dt = 0.02;
  double replan_interval = 0.02;  // decisions refresh every ceil(this/dt) steps
  double sim_horizon = 1.5;
  double min_initial_separation = 0.25;
  NeighbourStrategy strategy = NeighbourStrategy::kValue;
  std::uint64_t seed = 0;
  int scenario_id = 0;
};

/// Per-control-step record: the frozen-snapshot decisions of every agent
/// plus the neighbours each one selected.
struct StepRecord {
  double time = 0.0;
  std::vector<PolicyDecision> decisions;             // per agent
  std::vector<std::vector<int>> selected_neighbours;  // per agent, PAD = -1
  std::vector<double> min_pair_dist;  // per agent, min over this step's substeps
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<GoalSpec> goals;
  std::vector<WorldState> substeps;  // every RK4 substep boundary incl. t = 0
  std::vector<StepRecord> steps;
  std::vector<bool> collided;        // per agent
  std::vector<double> agent_cost;    // per agent: sum l dt + terminal distance
  double safety_rate = 0.0;          // fraction of collision-free agents
  bool safe_scenario = false;        // no agent collided
  std::string error;                 // non-empty if the scenario failed
};

/// Rejection-sampled initial conditions: positions uniform with all
/// pairwise separations >= min_initial_separation, zero velocities, goals
/// uniform. Deterministic per seed. Throws when the packing budget is
/// exhausted, reporting how many agents fit.
WorldState generate_scenario(const ScenarioConfig& config, const ArenaLimits& limits, Rng& rng);

/// Ranked neighbour selection for one agent: candidates within the
/// observation radius, ranked by the strategy (pair risk ascending /
/// distance ascending / seeded random), padded with kPadNeighbour. Ties
/// break toward the lower agent index.
std::vector<int> select_neighbours(const WorldState& world, int ego_index,
                                   const PolicyModels& models, double t,
                                   const TaskParams& task, NeighbourStrategy strategy,
                                   std::uint64_t step_seed);

/// One decentralized world step: every agent decides from the same frozen
/// snapshot, then all integrate one control interval (two RK4 half-steps)
/// with constant controls; velocities clamp to the arena bound afterwards.
/// Substep snapshots are appended to substeps_out for collision checking.
/// When hold_decisions is non-null (mid replan interval) the previous
/// decisions are applied unchanged.
WorldState world_step(const WorldState& world, const PolicyModels& models,
                      const PolicyConfig& policy_config, const ScenarioConfig& config,
                      const ArenaLimits& limits, const TaskParams& task, StepRecord& record,
                      std::vector<WorldState>& substeps_out,
                      const StepRecord* hold_decisions = nullptr);

/// Flags every agent involved in a pair at distance <= r at any stored
/// substep (the boundary counts as unsafe).
std::vector<bool> detect_collisions(const std::vector<WorldState>& substeps, double r);

struct MetricsReport {
  double cumulative_cost_mean = 0.0;  // over collision-free agents
  double cumulative_cost_std = 0.0;   // across seeds
  double safety_rate_mean = 0.0;
  double safety_rate_std = 0.0;
  double safe_scenario_mean = 0.0;
  double safe_scenario_std = 0.0;
  long num_scenarios = 0;
  long num_agents = 0;
  long num_collision_free_agents = 0;
  bool cost_defined = false;  // false when no trajectory was collision-free
};

/// Aggregates the three paper metrics; means and stds are across seeds
/// (scenarios grouped by ScenarioConfig::seed).
MetricsReport compute_metrics(const std::vector<ScenarioResult>& results);

struct RunBatchOptions {
  ScenarioConfig base;
  std::vector<std::uint64_t> seeds;
  int scenarios_per_seed = 10;
  int workers = 0;
};

struct RunBatchOutput {
  std::vector<ScenarioResult> results;
  MetricsReport report;
};

/// Runs scenarios_per_seed scenarios for every seed (parallel over
/// scenarios; output order is deterministic). Per-scenario errors are
/// recorded and the batch continues.
RunBatchOutput run_batch(const RunBatchOptions& options, const PolicyModels& models,
                         const PolicyConfig& policy_config, const ArenaLimits& limits,
                         const TaskParams& task);

/// Runs one scenario end to end.
ScenarioResult run_scenario(const ScenarioConfig& config, const PolicyModels& models,
                            const PolicyConfig& policy_config, const ArenaLimits& limits,
                            const TaskParams& task);

/// Trajectory log CSV (one row per agent per control step); columns:
/// scenario_id, step, time, agent_id, px, py, vx, vy, ax, ay, z_star,
/// feasible, selected_neighbours, min_pair_dist. z_star is -1 for
/// infeasible steps; selected_neighbours joins slots with '|' ('-' = PAD).
std::string trajectory_csv(const std::vector<ScenarioResult>& results);

/// Initial conditions and goals needed to recompute metrics from logs.
std::string scenario_csv(const std::vector<ScenarioResult>& results);

/// Human-readable aggregate report (deterministic content).
std::string metrics_report_text(const MetricsReport& report, const std::string& label);

}  // namespace hjnav
