// Command-line front end for the safe multi-agent navigation pipeline:
// train the value networks, solve the grid oracles, validate, simulate,
// and render value heatmaps. See README.md for usage examples.

#include <iostream>

#include <CLI11.hpp>

#include "hjnav/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"HJ value-function training and multi-agent navigation"};
  app.require_subcommand(0, 1);

  hjnav::DispatchRequest request;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", request.config_path, "pipeline configuration (JSON)");
    sub->add_option("--out", request.out_dir, "output directory");
  };

  CLI::App* train_epigraph =
      app.add_subcommand("train-epigraph", "train the auxiliary epigraph value function");
  add_common(train_epigraph);
  train_epigraph->add_option("--instance", request.instance, "nav | double1d");

  CLI::App* train_safety =
      app.add_subcommand("train-safety", "train the pairwise safety value function");
  add_common(train_safety);

  CLI::App* solve = app.add_subcommand("solve-grid", "run the dense grid oracle");
  add_common(solve);
  solve->add_option("--mode", request.mode, "vi | epigraph")->required();

  CLI::App* validate = app.add_subcommand("validate", "compare a trained net against a grid dump");
  add_common(validate);
  validate->add_option("--net", request.net_path, "checkpoint path")->required();
  validate->add_option("--grid", request.grid_path, "grid dump path")->required();
  validate->add_option("--out-file", request.out_file, "report file");

  CLI::App* simulate = app.add_subcommand("simulate", "run receding-horizon navigation scenarios");
  add_common(simulate);
  simulate->add_option("--aux", request.aux_path, "auxiliary value checkpoint");
  simulate->add_option("--safety", request.safety_path, "safety value checkpoint");
  simulate->add_option("--n-agents", request.n_agents, "agent count override");
  simulate->add_option("--strategy", request.strategy, "value | nearest | random");
  simulate->add_option("--seeds", request.seeds, "comma-separated seed list");
  simulate->add_option("--scenarios", request.scenarios, "scenarios per seed");

  CLI::App* heatmap = app.add_subcommand("heatmap", "ego-position value heatmap CSV");
  add_common(heatmap);
  heatmap->add_option("--aux", request.aux_path, "auxiliary value checkpoint");
  heatmap->add_option("--scene", request.scene_path, "scene spec (JSON)")->required();
  heatmap->add_option("--res", request.heatmap_res, "pixels per side");
  heatmap->add_option("--out-file", request.out_file, "CSV path")->required();

  CLI::App* report = app.add_subcommand("report", "recompute metrics from trajectory logs");
  add_common(report);
  report->add_option("--in", request.in_dir, "directory with simulate outputs")->required();
  report->add_option("--out-file", request.out_file, "report file");

  CLI11_PARSE(app, argc, argv);

  if (app.get_subcommands().empty()) {
    std::cerr << "error: category=usage: no command given (see --help)\n";
    return 2;
  }
  request.command = app.get_subcommands().front()->get_name();
  return hjnav::dispatch(request, std::cout, std::cerr);
}
