#include "hjnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hjnav/dynamics.hpp"
#include "hjnav/parallel.hpp"

namespace hjnav {

NeighbourStrategy neighbour_strategy_from_string(const std::string& name) {
  if (name == "value") return NeighbourStrategy::kValue;
  if (name == "nearest") return NeighbourStrategy::kNearest;
  if (name == "random") return NeighbourStrategy::kRandom;
  throw std::invalid_argument("unknown neighbour strategy: " + name);
}

std::string to_string(NeighbourStrategy s) {
  switch (s) {
    case NeighbourStrategy::kValue: return "value";
    case NeighbourStrategy::kNearest: return "nearest";
    case NeighbourStrategy::kRandom: return "random";
  }
  return "?";
}

WorldState generate_scenario(const ScenarioConfig& config, const ArenaLimits& limits, Rng& rng) {
  if (config.num_agents < 1) throw std::invalid_argument("generate_scenario: N >= 1 required");
  WorldState world;
  world.time = 0.0;
  const int budget_per_agent = 2000;
  for (int i = 0; i < config.num_agents; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < budget_per_agent && !placed; ++attempt) {
      const double px = rng.uniform(-limits.pos_bound, limits.pos_bound);
      const double py = rng.uniform(-limits.pos_bound, limits.pos_bound);
      placed = true;
      for (const AgentState& other : world.agents) {
        const double d = std::hypot(px - other.px, py - other.py);
        if (d < config.min_initial_separation) {
          placed = false;
          break;
        }
      }
      if (placed) world.agents.push_back(AgentState{px, py, 0.0, 0.0});
    }
    if (!placed)
      throw std::runtime_error("generate_scenario: packing budget exhausted after placing " +
                               std::to_string(world.agents.size()) + " of " +
                               std::to_string(config.num_agents) + " agents");
  }
  for (int i = 0; i < config.num_agents; ++i) {
    world.goals.push_back(GoalSpec{rng.uniform(-limits.pos_bound, limits.pos_bound),
                                   rng.uniform(-limits.pos_bound, limits.pos_bound)});
  }
  return world;
}

std::vector<int> select_neighbours(const WorldState& world, int ego_index,
                                   const PolicyModels& models, double t, const TaskParams& task,
                                   NeighbourStrategy strategy, std::uint64_t step_seed) {
  struct Candidate {
    int index;
    double key;
  };
  std::vector<Candidate> candidates;
  for (int j = 0; j < world.num_agents(); ++j) {
    if (j == ego_index) continue;
    const double dist = agent_distance(world.agents[ego_index], world.agents[j]);
    if (dist > task.observation_radius) continue;
    double key = 0.0;
    switch (strategy) {
      case NeighbourStrategy::kValue:
        key = pair_risk(*models.safety_net, *models.safety_problem, world.agents[ego_index],
                        world.agents[j], t);
        break;
      case NeighbourStrategy::kNearest:
        key = dist;
        break;
      case NeighbourStrategy::kRandom:
        key = 0.0;  // assigned below from the seeded stream
        break;
    }
    candidates.push_back(Candidate{j, key});
  }

  if (strategy == NeighbourStrategy::kRandom) {
    // Order-independent random keys: hash (seed, agent pair) so the result
    // does not depend on candidate enumeration order.
    for (Candidate& c : candidates) {
      Rng r(Rng::mix(step_seed, static_cast<std::uint64_t>(ego_index) << 32 |
                                    static_cast<std::uint64_t>(c.index)));
      c.key = r.uniform();
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.index < b.index;
  });

  std::vector<int> selected(task.num_neighbours, kPadNeighbour);
  for (int k = 0; k < task.num_neighbours && k < static_cast<int>(candidates.size()); ++k)
    selected[k] = candidates[k].index;
  return selected;
}

namespace {

double min_pair_distance_for(const WorldState& world, int agent) {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < world.num_agents(); ++j)
    if (j != agent) best = std::min(best, agent_distance(world.agents[agent], world.agents[j]));
  return best;
}

}  // namespace

WorldState world_step(const WorldState& world, const PolicyModels& models,
                      const PolicyConfig& policy_config, const ScenarioConfig& config,
                      const ArenaLimits& limits, const TaskParams& task, StepRecord& record,
                      std::vector<WorldState>& substeps_out,
                      const StepRecord* hold_decisions) {
  const int N = world.num_agents();
  record.time = world.time;
  record.decisions.resize(N);
  record.selected_neighbours.resize(N);
  record.min_pair_dist.assign(N, std::numeric_limits<double>::infinity());

  if (hold_decisions != nullptr) {
    record.decisions = hold_decisions->decisions;
    record.selected_neighbours = hold_decisions->selected_neighbours;
  } else {
    // Decisions are computed from the same frozen snapshot; the step seed
    // feeds only the random ablation strategy.
    const std::uint64_t step_seed = Rng::mix(
        config.seed, static_cast<std::uint64_t>(config.scenario_id) * 1000003ull +
                         static_cast<std::uint64_t>(std::llround(world.time / config.control_dt)));
    for (int i = 0; i < N; ++i) {
      record.selected_neighbours[i] =
          select_neighbours(world, i, models, 0.0, task, config.strategy, step_seed);
      record.decisions[i] = receding_step(world, i, record.selected_neighbours[i], models,
                                          policy_config, limits);
    }
  }

  // All agents integrate simultaneously; collision distances are recorded
  // at both RK4 half-step boundaries.
  WorldState current = world;
  const double half_dt = 0.5 * config.control_dt;
  for (int sub = 0; sub < 2; ++sub) {
    WorldState next = current;
    for (int i = 0; i < N; ++i)
      next.agents[i] = step_agent(current.agents[i], record.decisions[i].ego_control, half_dt);
    next.time = current.time + half_dt;
    for (int i = 0; i < N; ++i) {
      next.agents[i].vx = std::clamp(next.agents[i].vx, -limits.vel_bound, limits.vel_bound);
      next.agents[i].vy = std::clamp(next.agents[i].vy, -limits.vel_bound, limits.vel_bound);
    }
    if (N > 1)
      for (int i = 0; i < N; ++i)
        record.min_pair_dist[i] = std::min(record.min_pair_dist[i], min_pair_distance_for(next, i));
    substeps_out.push_back(next);
    current = std::move(next);
  }
  // Include the step-start separation so overlapping windows cover every
  // stored substep.
  if (N > 1)
    for (int i = 0; i < N; ++i)
      record.min_pair_dist[i] = std::min(record.min_pair_dist[i], min_pair_distance_for(world, i));
  return current;
}

std::vector<bool> detect_collisions(const std::vector<WorldState>& substeps, double r) {
  if (substeps.empty()) return {};
  const int N = substeps.front().num_agents();
  std::vector<bool> collided(N, false);
  for (const WorldState& w : substeps) {
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j) {
        if (agent_distance(w.agents[i], w.agents[j]) <= r) {
          collided[i] = true;
          collided[j] = true;
        }
      }
    }
  }
  return collided;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const PolicyModels& models,
                            const PolicyConfig& policy_config, const ArenaLimits& limits,
                            const TaskParams& task) {
  ScenarioResult result;
  result.config = config;
  try {
    Rng rng(Rng::mix(config.seed, 0x7363656eull + static_cast<std::uint64_t>(config.scenario_id)));
    WorldState world = generate_scenario(config, limits, rng);
    result.goals = world.goals;
    result.substeps.push_back(world);

    const int steps = std::max(1, static_cast<int>(std::llround(config.sim_horizon / config.control_dt)));
    const int replan_every = std::max(
        1, static_cast<int>(std::llround(config.replan_interval / config.control_dt)));
    result.agent_cost.assign(config.num_agents, 0.0);
    for (int s = 0; s < steps; ++s) {
      // Left Riemann sum of the per-agent goal distance.
      for (int i = 0; i < config.num_agents; ++i)
        result.agent_cost[i] +=
            goal_distance(world.agents[i], world.goals[i]) * config.control_dt;
      StepRecord record;
      const StepRecord* hold =
          (s % replan_every != 0 && !result.steps.empty()) ? &result.steps.back() : nullptr;
      world = world_step(world, models, policy_config, config, limits, task, record,
                         result.substeps, hold);
      result.steps.push_back(std::move(record));
    }
    for (int i = 0; i < config.num_agents; ++i)
      result.agent_cost[i] += goal_distance(world.agents[i], world.goals[i]);

    result.collided = detect_collisions(result.substeps, task.collision_radius);
    const long safe =
        std::count(result.collided.begin(), result.collided.end(), false);
    result.safety_rate = static_cast<double>(safe) / config.num_agents;
    result.safe_scenario = safe == config.num_agents;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

MetricsReport compute_metrics(const std::vector<ScenarioResult>& results) {
  if (results.empty()) throw std::invalid_argument("compute_metrics: empty batch");
  MetricsReport report;

  struct SeedAccum {
    double cost_sum = 0.0;
    long cost_n = 0;
    long safe_agents = 0;
    long agents = 0;
    long safe_scenarios = 0;
    long scenarios = 0;
  };
  std::vector<std::uint64_t> seed_order;
  std::vector<SeedAccum> accums;
  auto accum_for = [&](std::uint64_t seed) -> SeedAccum& {
    for (std::size_t i = 0; i < seed_order.size(); ++i)
      if (seed_order[i] == seed) return accums[i];
    seed_order.push_back(seed);
    accums.emplace_back();
    return accums.back();
  };

  for (const ScenarioResult& r : results) {
    if (!r.error.empty()) continue;
    SeedAccum& acc = accum_for(r.config.seed);
    acc.scenarios += 1;
    acc.safe_scenarios += r.safe_scenario ? 1 : 0;
    for (std::size_t i = 0; i < r.collided.size(); ++i) {
      acc.agents += 1;
      report.num_agents += 1;
      if (!r.collided[i]) {
        acc.safe_agents += 1;
        acc.cost_sum += r.agent_cost[i];
        acc.cost_n += 1;
        report.num_collision_free_agents += 1;
      }
    }
    report.num_scenarios += 1;
  }

  auto mean_std = [](const std::vector<double>& xs, double& mean, double& std_out) {
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    std_out = xs.size() > 1 ? std::sqrt(var / xs.size()) : 0.0;
  };

  std::vector<double> cost_by_seed, safety_by_seed, safe_sc_by_seed;
  for (const SeedAccum& acc : accums) {
    if (acc.scenarios == 0) continue;
    safety_by_seed.push_back(acc.agents > 0 ? static_cast<double>(acc.safe_agents) / acc.agents
                                            : 0.0);
    safe_sc_by_seed.push_back(static_cast<double>(acc.safe_scenarios) / acc.scenarios);
    if (acc.cost_n > 0) cost_by_seed.push_back(acc.cost_sum / acc.cost_n);
  }
  if (safety_by_seed.empty())
    throw std::invalid_argument("compute_metrics: no successful scenarios");
  mean_std(safety_by_seed, report.safety_rate_mean, report.safety_rate_std);
  mean_std(safe_sc_by_seed, report.safe_scenario_mean, report.safe_scenario_std);
  if (!cost_by_seed.empty()) {
    report.cost_defined = true;
    mean_std(cost_by_seed, report.cumulative_cost_mean, report.cumulative_cost_std);
  }
  return report;
}

RunBatchOutput run_batch(const RunBatchOptions& options, const PolicyModels& models,
                         const PolicyConfig& policy_config, const ArenaLimits& limits,
                         const TaskParams& task) {
  RunBatchOutput output;
  std::vector<ScenarioConfig> configs;
  for (std::uint64_t seed : options.seeds) {
    for (int k = 0; k < options.scenarios_per_seed; ++k) {
      ScenarioConfig cfg = options.base;
      cfg.seed = seed;
      cfg.scenario_id = k;
      configs.push_back(cfg);
    }
  }
  output.results.resize(configs.size());
  parallel_for(
      static_cast<int>(configs.size()),
      [&](int i) {
        output.results[i] = run_scenario(configs[i], models, policy_config, limits, task);
      },
      options.workers);
  output.report = compute_metrics(output.results);
  return output;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string trajectory_csv(const std::vector<ScenarioResult>& results) {
  std::string out =
      "scenario_id,step,time,agent_id,px,py,vx,vy,ax,ay,z_star,feasible,"
      "selected_neighbours,min_pair_dist\n";
  for (const ScenarioResult& r : results) {
    if (!r.error.empty()) continue;
    auto emit_row = [&](std::size_t step, const StepRecord& rec, const WorldState& w,
                        int a, double min_dist) {
      const PolicyDecision& d = rec.decisions[a];
      std::string nbrs;
      for (std::size_t k = 0; k < rec.selected_neighbours[a].size(); ++k) {
        if (k) nbrs += '|';
        const int idx = rec.selected_neighbours[a][k];
        nbrs += idx == kPadNeighbour ? std::string("-") : std::to_string(idx);
      }
      out += std::to_string(r.config.scenario_id) + ',' + std::to_string(step) + ',' +
             format_double(w.time) + ',' + std::to_string(a) + ',' +
             format_double(w.agents[a].px) + ',' + format_double(w.agents[a].py) + ',' +
             format_double(w.agents[a].vx) + ',' + format_double(w.agents[a].vy) + ',' +
             format_double(d.ego_control.ax) + ',' + format_double(d.ego_control.ay) + ',' +
             format_double(d.feasible ? d.z_star : -1.0) + ',' + (d.feasible ? "1" : "0") +
             ',' + nbrs + ',' +
             (std::isfinite(min_dist) ? format_double(min_dist) : std::string("inf")) + '\n';
    };
    for (std::size_t s = 0; s < r.steps.size(); ++s) {
      const StepRecord& rec = r.steps[s];
      // State at the step start (what the decisions saw): substep 2s.
      const WorldState& w = r.substeps[2 * s];
      for (int a = 0; a < r.config.num_agents; ++a) {
        emit_row(s, rec, w, a,
                 r.config.num_agents > 1 ? rec.min_pair_dist[a]
                                         : std::numeric_limits<double>::infinity());
      }
    }
    // Terminal row per agent: the final state, so costs are exactly
    // recomputable from this log alone. Decision fields echo the last step.
    if (!r.steps.empty()) {
      const WorldState& wf = r.substeps.back();
      for (int a = 0; a < r.config.num_agents; ++a) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < r.config.num_agents; ++j)
          if (j != a) min_dist = std::min(min_dist, agent_distance(wf.agents[a], wf.agents[j]));
        emit_row(r.steps.size(), r.steps.back(), wf, a, min_dist);
      }
    }
  }
  return out;
}

std::string scenario_csv(const std::vector<ScenarioResult>& results) {
  std::string out = "scenario_id,seed,agent_id,px0,py0,gx,gy,collided,agent_cost\n";
  for (const ScenarioResult& r : results) {
    if (!r.error.empty()) continue;
    const WorldState& w0 = r.substeps.front();
    for (int a = 0; a < r.config.num_agents; ++a) {
      out += std::to_string(r.config.scenario_id) + ',' + std::to_string(r.config.seed) + ',' +
             std::to_string(a) + ',' + format_double(w0.agents[a].px) + ',' +
             format_double(w0.agents[a].py) + ',' + format_double(r.goals[a].gx) + ',' +
             format_double(r.goals[a].gy) + ',' + (r.collided[a] ? "1" : "0") + ',' +
             format_double(r.agent_cost[a]) + '\n';
    }
  }
  return out;
}

std::string metrics_report_text(const MetricsReport& report, const std::string& label) {
  std::string out;
  out += "simulation report: " + label + "\n";
  out += "scenarios: " + std::to_string(report.num_scenarios) + "\n";
  out += "agent trajectories: " + std::to_string(report.num_agents) + "\n";
  out += "collision-free trajectories: " + std::to_string(report.num_collision_free_agents) + "\n";
  out += "safety_rate: mean " + format_double(report.safety_rate_mean) + " std " +
         format_double(report.safety_rate_std) + "\n";
  out += "safe_scenarios: mean " + format_double(report.safe_scenario_mean) + " std " +
         format_double(report.safe_scenario_std) + "\n";
  if (report.cost_defined) {
    out += "cumulative_cost: mean " + format_double(report.cumulative_cost_mean) + " std " +
           format_double(report.cumulative_cost_std) + "\n";
  } else {
    out += "cumulative_cost: undefined (no collision-free trajectories)\n";
  }
  return out;
}

}  // namespace hjnav
