#include "hjnav/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hjnav/sim.hpp"

namespace hjnav {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& scope,
                         const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key))
      throw ConfigError("config: unknown key '" + (scope.empty() ? key : scope + "." + key) + "'");
  }
}

template <class T>
void read_field(const json& obj, const std::string& scope, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value type for '" +
                      (scope.empty() ? key : scope + "." + std::string(key)) + "'");
  }
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError(std::string("config: '") + key + "' must be positive");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  reject_unknown_keys(root, "",
                      {"version", "seed", "arena", "task", "aux_net", "safety_net", "adam",
                       "training", "double1d", "grid", "sim", "workers"});

  RunConfig cfg;
  read_field(root, "", "version", cfg.version);
  if (cfg.version != 1)
    throw ConfigError("config: unsupported version " + std::to_string(cfg.version));
  read_field(root, "", "seed", cfg.seed);
  read_field(root, "", "workers", cfg.workers);

  if (root.contains("arena")) {
    const json& j = root["arena"];
    reject_unknown_keys(j, "arena", {"pos_bound", "vel_bound", "accel_bound"});
    read_field(j, "arena", "pos_bound", cfg.arena.pos_bound);
    read_field(j, "arena", "vel_bound", cfg.arena.vel_bound);
    read_field(j, "arena", "accel_bound", cfg.arena.accel_bound);
  }
  if (root.contains("task")) {
    const json& j = root["task"];
    reject_unknown_keys(j, "task",
                        {"collision_radius", "observation_radius", "num_neighbours", "horizon",
                         "z_max"});
    read_field(j, "task", "collision_radius", cfg.task.collision_radius);
    read_field(j, "task", "observation_radius", cfg.task.observation_radius);
    read_field(j, "task", "num_neighbours", cfg.task.num_neighbours);
    read_field(j, "task", "horizon", cfg.task.horizon);
    read_field(j, "task", "z_max", cfg.task.z_max_override);
  }
  auto read_net = [&](const char* name, NetConfig& net) {
    if (!root.contains(name)) return;
    const json& j = root[name];
    reject_unknown_keys(j, name, {"hidden", "omega0"});
    read_field(j, name, "hidden", net.hidden);
    read_field(j, name, "omega0", net.omega0);
  };
  read_net("aux_net", cfg.aux_net);
  read_net("safety_net", cfg.safety_net);
  if (root.contains("adam")) {
    const json& j = root["adam"];
    reject_unknown_keys(j, "adam", {"lr", "beta1", "beta2", "eps"});
    read_field(j, "adam", "lr", cfg.adam.lr);
    read_field(j, "adam", "beta1", cfg.adam.beta1);
    read_field(j, "adam", "beta2", cfg.adam.beta2);
    read_field(j, "adam", "eps", cfg.adam.eps);
  }
  if (root.contains("training")) {
    const json& j = root["training"];
    reject_unknown_keys(j, "training",
                        {"iterations", "curriculum_fraction", "batch_size", "log_interval",
                         "checkpoint_interval", "log_timing"});
    read_field(j, "training", "iterations", cfg.training.iterations);
    read_field(j, "training", "curriculum_fraction", cfg.training.curriculum_fraction);
    read_field(j, "training", "batch_size", cfg.training.batch_size);
    read_field(j, "training", "log_interval", cfg.training.log_interval);
    read_field(j, "training", "checkpoint_interval", cfg.training.checkpoint_interval);
    read_field(j, "training", "log_timing", cfg.training.log_timing);
  }
  if (root.contains("double1d")) {
    const json& j = root["double1d"];
    reject_unknown_keys(j, "double1d",
                        {"x_bound", "v_bound", "accel_bound", "horizon", "goal_x",
                         "obstacle_center", "obstacle_halfwidth", "z_max"});
    read_field(j, "double1d", "x_bound", cfg.double1d.x_bound);
    read_field(j, "double1d", "v_bound", cfg.double1d.v_bound);
    read_field(j, "double1d", "accel_bound", cfg.double1d.accel_bound);
    read_field(j, "double1d", "horizon", cfg.double1d.horizon);
    read_field(j, "double1d", "goal_x", cfg.double1d.goal_x);
    read_field(j, "double1d", "obstacle_center", cfg.double1d.obstacle_center);
    read_field(j, "double1d", "obstacle_halfwidth", cfg.double1d.obstacle_halfwidth);
    read_field(j, "double1d", "z_max", cfg.double1d.z_max);
  }
  if (root.contains("grid")) {
    const json& j = root["grid"];
    reject_unknown_keys(j, "grid", {"points_per_axis", "memory_cap_gib", "cfl_safety"});
    read_field(j, "grid", "points_per_axis", cfg.grid.points_per_axis);
    read_field(j, "grid", "memory_cap_gib", cfg.grid.memory_cap_gib);
    read_field(j, "grid", "cfl_safety", cfg.grid.cfl_safety);
  }
  if (root.contains("sim")) {
    const json& j = root["sim"];
    reject_unknown_keys(j, "sim",
                        {"num_agents", "control_dt", "replan_interval", "sim_horizon",
                         "min_initial_separation", "scenarios", "strategy", "seeds"});
    read_field(j, "sim", "num_agents", cfg.sim.num_agents);
    read_field(j, "sim", "control_dt", cfg.sim.control_dt);
    read_field(j, "sim", "replan_interval", cfg.sim.replan_interval);
    read_field(j, "sim", "sim_horizon", cfg.sim.sim_horizon);
    read_field(j, "sim", "min_initial_separation", cfg.sim.min_initial_separation);
    read_field(j, "sim", "scenarios", cfg.sim.scenarios);
    read_field(j, "sim", "strategy", cfg.sim.strategy);
    read_field(j, "sim", "seeds", cfg.sim.seeds);
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  require_positive(cfg.arena.pos_bound, "arena.pos_bound");
  require_positive(cfg.arena.vel_bound, "arena.vel_bound");
  require_positive(cfg.arena.accel_bound, "arena.accel_bound");
  require_positive(cfg.task.collision_radius, "task.collision_radius");
  require_positive(cfg.task.observation_radius, "task.observation_radius");
  require_positive(cfg.task.horizon, "task.horizon");
  if (cfg.task.num_neighbours < 0)
    throw ConfigError("config: 'task.num_neighbours' must be non-negative");
  if (cfg.task.z_max_override < 0.0)
    throw ConfigError("config: 'task.z_max' must be non-negative");
  require_positive(cfg.adam.lr, "adam.lr");
  if (!(cfg.adam.beta1 > 0.0 && cfg.adam.beta1 < 1.0))
    throw ConfigError("config: 'adam.beta1' must be in (0,1)");
  if (!(cfg.adam.beta2 > 0.0 && cfg.adam.beta2 < 1.0))
    throw ConfigError("config: 'adam.beta2' must be in (0,1)");
  if (cfg.training.iterations < 1)
    throw ConfigError("config: 'training.iterations' must be >= 1");
  if (cfg.training.batch_size < 1)
    throw ConfigError("config: 'training.batch_size' must be >= 1");
  if (!(cfg.training.curriculum_fraction > 0.0 && cfg.training.curriculum_fraction <= 1.0))
    throw ConfigError("config: 'training.curriculum_fraction' must be in (0,1]");
  for (const NetConfig* net : {&cfg.aux_net, &cfg.safety_net}) {
    if (net->hidden.empty()) throw ConfigError("config: network needs at least one hidden layer");
    for (int h : net->hidden)
      if (h < 1) throw ConfigError("config: hidden layer sizes must be positive");
    require_positive(net->omega0, "net.omega0");
  }
  require_positive(cfg.double1d.x_bound, "double1d.x_bound");
  require_positive(cfg.double1d.v_bound, "double1d.v_bound");
  require_positive(cfg.double1d.accel_bound, "double1d.accel_bound");
  require_positive(cfg.double1d.horizon, "double1d.horizon");
  require_positive(cfg.double1d.obstacle_halfwidth, "double1d.obstacle_halfwidth");
  if (std::abs(cfg.double1d.goal_x) > cfg.double1d.x_bound)
    throw ConfigError("config: 'double1d.goal_x' outside the state box");
  if (cfg.grid.points_per_axis < 3)
    throw ConfigError("config: 'grid.points_per_axis' must be >= 3");
  require_positive(cfg.grid.memory_cap_gib, "grid.memory_cap_gib");
  if (!(cfg.grid.cfl_safety > 0.0 && cfg.grid.cfl_safety <= 1.0))
    throw ConfigError("config: 'grid.cfl_safety' must be in (0,1]");
  if (cfg.sim.num_agents < 1) throw ConfigError("config: 'sim.num_agents' must be >= 1");
  require_positive(cfg.sim.control_dt, "sim.control_dt");
  require_positive(cfg.sim.sim_horizon, "sim.sim_horizon");
  if (cfg.sim.replan_interval + 1e-12 < cfg.sim.control_dt)
    throw ConfigError("config: 'sim.replan_interval' must be >= control_dt");
  if (!(cfg.sim.min_initial_separation > cfg.task.collision_radius))
    throw ConfigError(
        "config: 'sim.min_initial_separation' must exceed task.collision_radius");
  if (cfg.sim.scenarios < 1) throw ConfigError("config: 'sim.scenarios' must be >= 1");
  neighbour_strategy_from_string(cfg.sim.strategy);  // throws on bad names
  if (cfg.sim.seeds.empty()) throw ConfigError("config: 'sim.seeds' must not be empty");
  if (cfg.workers < 0) throw ConfigError("config: 'workers' must be non-negative");
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open file: " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_config_text(buffer.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json root;
  root["version"] = cfg.version;
  root["seed"] = cfg.seed;
  root["workers"] = cfg.workers;
  root["arena"] = {{"pos_bound", cfg.arena.pos_bound},
                   {"vel_bound", cfg.arena.vel_bound},
                   {"accel_bound", cfg.arena.accel_bound}};
  root["task"] = {{"collision_radius", cfg.task.collision_radius},
                  {"observation_radius", cfg.task.observation_radius},
                  {"num_neighbours", cfg.task.num_neighbours},
                  {"horizon", cfg.task.horizon},
                  {"z_max", cfg.task.z_max_override}};
  root["aux_net"] = {{"hidden", cfg.aux_net.hidden}, {"omega0", cfg.aux_net.omega0}};
  root["safety_net"] = {{"hidden", cfg.safety_net.hidden}, {"omega0", cfg.safety_net.omega0}};
  root["adam"] = {{"lr", cfg.adam.lr},
                  {"beta1", cfg.adam.beta1},
                  {"beta2", cfg.adam.beta2},
                  {"eps", cfg.adam.eps}};
  root["training"] = {{"iterations", cfg.training.iterations},
                      {"curriculum_fraction", cfg.training.curriculum_fraction},
                      {"batch_size", cfg.training.batch_size},
                      {"log_interval", cfg.training.log_interval},
                      {"checkpoint_interval", cfg.training.checkpoint_interval},
                      {"log_timing", cfg.training.log_timing}};
  root["double1d"] = {{"x_bound", cfg.double1d.x_bound},
                      {"v_bound", cfg.double1d.v_bound},
                      {"accel_bound", cfg.double1d.accel_bound},
                      {"horizon", cfg.double1d.horizon},
                      {"goal_x", cfg.double1d.goal_x},
                      {"obstacle_center", cfg.double1d.obstacle_center},
                      {"obstacle_halfwidth", cfg.double1d.obstacle_halfwidth},
                      {"z_max", cfg.double1d.z_max}};
  root["grid"] = {{"points_per_axis", cfg.grid.points_per_axis},
                  {"memory_cap_gib", cfg.grid.memory_cap_gib},
                  {"cfl_safety", cfg.grid.cfl_safety}};
  root["sim"] = {{"num_agents", cfg.sim.num_agents},
                 {"control_dt", cfg.sim.control_dt},
                 {"replan_interval", cfg.sim.replan_interval},
                 {"sim_horizon", cfg.sim.sim_horizon},
                 {"min_initial_separation", cfg.sim.min_initial_separation},
                 {"scenarios", cfg.sim.scenarios},
                 {"strategy", cfg.sim.strategy},
                 {"seeds", cfg.sim.seeds}};
  return root.dump(2) + "\n";
}

void save_config(const std::string& path, const RunConfig& cfg) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw ConfigError("config: cannot write: " + path);
    os << config_to_json(cfg);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hjnav
