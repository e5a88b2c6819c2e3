#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjnav/adam.hpp"
#include "hjnav/epigraph.hpp"
#include "hjnav/types.hpp"

namespace hjnav {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetConfig {
  std::vector<int> hidden = {256, 256, 256};
  double omega0 = 30.0;
};

struct TrainingConfig {
  int iterations = 100000;
  double curriculum_fraction = 0.8;
  int batch_size = 2000;
  int log_interval = 100;
  int checkpoint_interval = 10000;
  bool log_timing = true;
};

struct GridConfig {
  int points_per_axis = 41;
  double memory_cap_gib = 4.0;
  double cfl_safety = 0.8;
};

struct SimConfig {
  int num_agents = 3;
  double control_dt = 0.02;
  double replan_interval = 0.02;
  double sim_horizon = 1.5;
  double min_initial_separation = 0.25;
  int scenarios = 50;
  std::string strategy = "value";
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
};

/// One schema-versioned configuration drives the whole pipeline.
struct RunConfig {
  int version = 1;
  std::uint64_t seed = 0;
  ArenaLimits arena;
  TaskParams task;
  NetConfig aux_net;
  NetConfig safety_net;
  AdamConfig adam;       // paper default lr 2e-5
  TrainingConfig training;
  Double1DParams double1d;
  GridConfig grid;
  SimConfig sim;
  int workers = 0;  // 0 = HJNAV_WORKERS env or hardware

  double grid_memory_cap_bytes() const { return grid.memory_cap_gib * 1073741824.0; }
};

/// Parses, defaults and validates; unknown keys and schema violations are
/// rejected with the offending key named.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);
std::string config_to_json(const RunConfig& config);
void save_config(const std::string& path, const RunConfig& config);
void validate_config(const RunConfig& config);

}  // namespace hjnav
