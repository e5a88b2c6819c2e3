#pragma once

#include <iosfwd>
#include <string>

namespace hjnav {

/// Exit code families reported by dispatch (machine-readable categories).
enum class DispatchStatus : int {
  kOk = 0,
  kUsage = 2,
  kConfig = 3,
  kDependency = 4,
  kRuntime = 5,
};

struct DispatchRequest {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string instance = "nav";  // train-epigraph: nav | double1d
  std::string mode;              // solve-grid: vi | epigraph
  std::string net_path;          // validate
  std::string grid_path;         // validate
  std::string aux_path;          // simulate / heatmap
  std::string safety_path;       // simulate
  std::string scene_path;        // heatmap
  int heatmap_res = 50;
  std::string in_dir;   // report
  std::string out_file;  // validate / heatmap / report
  int n_agents = 0;      // simulate override (0 = config)
  std::string strategy;  // simulate override
  std::string seeds;     // simulate override, comma separated
  int scenarios = 0;     // simulate override
};

/// Executes one pipeline command. Writes human output to out, errors to
/// err as "error: category=<name>: <message>", and returns the exit code.
int dispatch(const DispatchRequest& request, std::ostream& out, std::ostream& err);

}  // namespace hjnav
