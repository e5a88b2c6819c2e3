#include "hjnav/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "hjnav/checkpoint.hpp"
#include "hjnav/config.hpp"
#include "hjnav/grid.hpp"
#include "hjnav/parallel.hpp"
#include "hjnav/policy.hpp"
#include "hjnav/sim.hpp"

namespace hjnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DispatchError : std::runtime_error {
  DispatchStatus status;
  DispatchError(DispatchStatus s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

const char* category_name(DispatchStatus s) {
  switch (s) {
    case DispatchStatus::kOk: return "ok";
    case DispatchStatus::kUsage: return "usage";
    case DispatchStatus::kConfig: return "config";
    case DispatchStatus::kDependency: return "dependency";
    case DispatchStatus::kRuntime: return "runtime";
  }
  return "?";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DispatchError(DispatchStatus::kRuntime, "cannot write " + path);
    os << content;
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DispatchError(DispatchStatus::kDependency, "missing file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Every artifact a command writes is recorded here (sorted, deduplicated,
// no timestamps, so reruns reproduce the same manifest).
void record_artifacts(const std::string& dir, const std::string& command,
                      const std::vector<std::string>& paths) {
  const std::string manifest_path = dir + "/manifest.txt";
  std::set<std::string> lines;
  if (fs::exists(manifest_path)) {
    std::ifstream is(manifest_path);
    std::string line;
    while (std::getline(is, line))
      if (!line.empty()) lines.insert(line);
  }
  for (const std::string& p : paths) lines.insert(command + "\t" + p);
  std::string out;
  for (const std::string& line : lines) out += line + "\n";
  write_file_atomic(manifest_path, out);
}

RunConfig require_config(const DispatchRequest& request) {
  if (request.config_path.empty())
    throw DispatchError(DispatchStatus::kUsage, "--config is required");
  try {
    return load_config(request.config_path);
  } catch (const ConfigError& e) {
    throw DispatchError(DispatchStatus::kConfig, e.what());
  }
}

std::string require_out_dir(const DispatchRequest& request) {
  if (request.out_dir.empty()) throw DispatchError(DispatchStatus::kUsage, "--out is required");
  fs::create_directories(request.out_dir);
  return request.out_dir;
}

Checkpoint load_checkpoint_dep(const std::string& path, const std::string& what) {
  if (path.empty())
    throw DispatchError(DispatchStatus::kUsage, "missing checkpoint flag for " + what);
  if (!fs::exists(path))
    throw DispatchError(DispatchStatus::kDependency,
                        "missing artifact: " + what + " checkpoint at " + path);
  try {
    return load_checkpoint(path);
  } catch (const CheckpointError& e) {
    throw DispatchError(DispatchStatus::kDependency, e.what());
  }
}

Arch make_arch(int input_dim, const NetConfig& net) {
  Arch arch;
  arch.input_dim = input_dim;
  arch.hidden = net.hidden;
  arch.omega0 = net.omega0;
  return arch;
}

TrainOptions make_train_options(const RunConfig& cfg, const std::string& log_path,
                                const std::string& ckpt_path) {
  TrainOptions opt;
  opt.curriculum.iterations = cfg.training.iterations;
  opt.curriculum.curriculum_fraction = cfg.training.curriculum_fraction;
  opt.curriculum.batch_size = cfg.training.batch_size;
  opt.curriculum.seed = cfg.seed;
  opt.adam = cfg.adam;
  opt.log_interval = cfg.training.log_interval;
  opt.checkpoint_interval = cfg.training.checkpoint_interval;
  opt.checkpoint_path = ckpt_path;
  opt.log_path = log_path;
  opt.log_timing = cfg.training.log_timing;
  opt.workers = cfg.workers;
  return opt;
}

int run_train_epigraph(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  const std::string dir = require_out_dir(request);

  std::unique_ptr<EpigraphInstance> instance;
  std::string tag;
  if (request.instance == "nav") {
    instance = std::make_unique<NavigationEpigraphInstance>(cfg.arena, cfg.task);
    tag = "aux_value";
  } else if (request.instance == "double1d") {
    instance = std::make_unique<Double1DEpigraphInstance>(cfg.double1d);
    tag = "aux_value_1d";
  } else {
    throw DispatchError(DispatchStatus::kUsage,
                        "unknown --instance '" + request.instance + "' (nav | double1d)");
  }

  const std::string ckpt = dir + "/" + tag + ".ckpt";
  const std::string log = dir + "/train_epigraph_" + request.instance + ".csv";
  const NetParams initial = init_params(cfg.seed, make_arch(instance->input_dim(), cfg.aux_net));
  const TrainOutcome outcome =
      train_residual_net(*instance, make_train_options(cfg, log, ckpt), initial);
  if (outcome.nan_abort)
    throw DispatchError(DispatchStatus::kRuntime,
                        "training aborted: non-finite loss at iteration " +
                            std::to_string(outcome.abort_iteration));
  record_artifacts(dir, "train-epigraph", {ckpt, log});
  out << "trained " << tag << ": final loss " << outcome.final_loss << ", checkpoint " << ckpt
      << "\n";
  return 0;
}

int run_train_safety(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  const std::string dir = require_out_dir(request);
  const SafetyReachProblem problem(SafetyProblemParams::from_task(cfg.arena, cfg.task));

  const std::string ckpt = dir + "/safety_value.ckpt";
  const std::string log = dir + "/train_safety.csv";
  const NetParams initial =
      init_params(cfg.seed + 1, make_arch(problem.input_dim(), cfg.safety_net));
  const TrainOutcome outcome =
      train_residual_net(problem, make_train_options(cfg, log, ckpt), initial);
  if (outcome.nan_abort)
    throw DispatchError(DispatchStatus::kRuntime,
                        "training aborted: non-finite loss at iteration " +
                            std::to_string(outcome.abort_iteration));
  record_artifacts(dir, "train-safety", {ckpt, log});
  out << "trained safety_value: final loss " << outcome.final_loss << ", checkpoint " << ckpt
      << "\n";
  return 0;
}

int run_solve_grid(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  const std::string dir = require_out_dir(request);

  GridProblem problem;
  std::string tag;
  if (request.mode == "vi") {
    problem = make_safety_vi_grid(SafetyProblemParams::from_task(cfg.arena, cfg.task),
                                  cfg.grid.points_per_axis);
    tag = "grid_vi";
  } else if (request.mode == "epigraph") {
    problem = make_double1d_epigraph_grid(cfg.double1d, cfg.grid.points_per_axis);
    tag = "grid_epigraph";
  } else {
    throw DispatchError(DispatchStatus::kUsage,
                        "unknown --mode '" + request.mode + "' (vi | epigraph)");
  }

  GridSolveOptions options;
  options.horizon = request.mode == "vi" ? cfg.task.horizon : cfg.double1d.horizon;
  options.cfl_safety = cfg.grid.cfl_safety;
  options.memory_cap_bytes = cfg.grid_memory_cap_bytes();
  options.workers = cfg.workers;
  const GridSolveResult result = solve_grid(problem, options);

  const std::string path = dir + "/" + tag + ".bin";
  save_grid(path, result.final_field);
  record_artifacts(dir, "solve-grid", {path});
  out << "solved " << tag << " in " << result.steps << " steps (dt " << result.dt
      << "), saved " << path << "\n";
  return 0;
}

// Builds a net evaluator for a grid slice: the checkpoint's input dim picks
// the instance kind (5 = safety pair, 4 = 1-D epigraph).
std::function<double(const Eigen::VectorXd&)> make_grid_evaluator(const Checkpoint& ckpt,
                                                                  const RunConfig& cfg,
                                                                  const GridField& field,
                                                                  ExactBcNet& net_out) {
  if (ckpt.params.arch.input_dim == 5 && field.dims() == 4) {
    const SafetyReachProblem problem(SafetyProblemParams::from_task(cfg.arena, cfg.task));
    net_out = problem.make_net(ckpt.params);
  } else if (ckpt.params.arch.input_dim == 4 && field.dims() == 3) {
    const Double1DEpigraphInstance instance(cfg.double1d);
    net_out = instance.make_net(ckpt.params);
  } else {
    throw DispatchError(DispatchStatus::kDependency,
                        "checkpoint input dim " + std::to_string(ckpt.params.arch.input_dim) +
                            " does not match grid dims " + std::to_string(field.dims()));
  }
  const double t = field.time;
  const ExactBcNet* net = &net_out;
  return [net, t](const Eigen::VectorXd& x) {
    Eigen::VectorXd q(x.size() + 1);
    q[0] = t;
    q.tail(x.size()) = x;
    return net->value(q);
  };
}

int run_validate(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  if (request.grid_path.empty() || request.net_path.empty())
    throw DispatchError(DispatchStatus::kUsage, "validate needs --net and --grid");
  if (!fs::exists(request.grid_path))
    throw DispatchError(DispatchStatus::kDependency,
                        "missing artifact: grid dump at " + request.grid_path);
  const GridField field = load_grid(request.grid_path);
  const Checkpoint ckpt = load_checkpoint_dep(request.net_path, "value net");

  ExactBcNet net;
  const auto evaluator = make_grid_evaluator(ckpt, cfg, field, net);
  CompareSpec spec;
  spec.max_points = 200000;
  spec.seed = cfg.seed;
  const CompareReport report = compare(field, evaluator, spec);

  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "grid-vs-net comparison\npoints: %ld\nconfident (|V|>%.3g): %ld\n"
                "sign_agreement_pct: %.4f\nmae_confident: %.6f\nmax_abs_err: %.6f\n",
                report.n_points, spec.margin, report.n_confident, report.sign_agreement_pct,
                report.mae_confident, report.max_abs_err);
  std::string text = buf;
  out << text;
  if (!request.out_file.empty()) {
    write_file_atomic(request.out_file, text);
    const fs::path parent = fs::path(request.out_file).parent_path();
    record_artifacts(parent.empty() ? "." : parent.string(), "validate", {request.out_file});
  }
  return 0;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw DispatchError(DispatchStatus::kUsage, "empty --seeds list");
  return seeds;
}

PolicyModels load_models(const DispatchRequest& request, const RunConfig& cfg) {
  const Checkpoint aux = load_checkpoint_dep(request.aux_path, "auxiliary value");
  const Checkpoint safety = load_checkpoint_dep(request.safety_path, "safety value");

  auto nav = std::make_shared<NavigationEpigraphInstance>(cfg.arena, cfg.task);
  if (aux.params.arch.input_dim != nav->input_dim())
    throw DispatchError(DispatchStatus::kDependency,
                        "auxiliary checkpoint input dim mismatch with config");
  auto safety_problem =
      std::make_shared<SafetyReachProblem>(SafetyProblemParams::from_task(cfg.arena, cfg.task));
  if (safety.params.arch.input_dim != safety_problem->input_dim())
    throw DispatchError(DispatchStatus::kDependency,
                        "safety checkpoint input dim mismatch with config");

  PolicyModels models;
  models.nav_instance = nav;
  models.safety_problem = safety_problem;
  models.aux_net = std::make_shared<ExactBcNet>(nav->make_net(aux.params));
  models.safety_net = std::make_shared<ExactBcNet>(safety_problem->make_net(safety.params));
  return models;
}

int run_simulate(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  const std::string dir = require_out_dir(request);
  const PolicyModels models = load_models(request, cfg);

  RunBatchOptions options;
  options.base.num_agents = request.n_agents > 0 ? request.n_agents : cfg.sim.num_agents;
  options.base.control_dt = cfg.sim.control_dt;
  options.base.replan_interval = cfg.sim.replan_interval;
  options.base.sim_horizon = cfg.sim.sim_horizon;
  options.base.min_initial_separation = cfg.sim.min_initial_separation;
  options.base.strategy = neighbour_strategy_from_string(
      request.strategy.empty() ? cfg.sim.strategy : request.strategy);
  options.seeds = request.seeds.empty() ? cfg.sim.seeds : parse_seed_list(request.seeds);
  options.scenarios_per_seed = request.scenarios > 0 ? request.scenarios : cfg.sim.scenarios;
  options.workers = cfg.workers;

  PolicyConfig policy_config;
  const RunBatchOutput output = run_batch(options, models, policy_config, cfg.arena, cfg.task);

  const std::string label = std::to_string(options.base.num_agents) + " agents, strategy " +
                            to_string(options.base.strategy);
  const std::string traj_path = dir + "/trajectories.csv";
  const std::string scen_path = dir + "/scenarios.csv";
  const std::string report_path = dir + "/report.txt";
  write_file_atomic(traj_path, trajectory_csv(output.results));
  write_file_atomic(scen_path, scenario_csv(output.results));
  write_file_atomic(report_path, metrics_report_text(output.report, label));
  record_artifacts(dir, "simulate", {traj_path, scen_path, report_path});

  long failed = 0;
  for (const ScenarioResult& r : output.results)
    if (!r.error.empty()) ++failed;
  out << metrics_report_text(output.report, label);
  if (failed > 0) out << "scenario errors: " << failed << "\n";
  return 0;
}

int run_heatmap(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  if (request.scene_path.empty())
    throw DispatchError(DispatchStatus::kUsage, "heatmap needs --scene");
  if (request.out_file.empty())
    throw DispatchError(DispatchStatus::kUsage, "heatmap needs --out-file");
  if (request.heatmap_res < 2)
    throw DispatchError(DispatchStatus::kUsage, "heatmap resolution must be >= 2");

  const Checkpoint aux = load_checkpoint_dep(request.aux_path, "auxiliary value");
  auto nav = std::make_shared<NavigationEpigraphInstance>(cfg.arena, cfg.task);
  if (aux.params.arch.input_dim != nav->input_dim())
    throw DispatchError(DispatchStatus::kDependency,
                        "auxiliary checkpoint input dim mismatch with config");
  const ExactBcNet net = nav->make_net(aux.params);

  json scene;
  try {
    scene = json::parse(read_file(request.scene_path));
  } catch (const json::exception& e) {
    throw DispatchError(DispatchStatus::kConfig, std::string("scene spec: ") + e.what());
  }

  Observation obs;
  obs.ego.is_virtual = false;
  obs.ego.state = AgentState{0.0, 0.0, scene.value("ego_vx", 0.0), scene.value("ego_vy", 0.0)};
  obs.ego.goal = GoalSpec{scene.value("ego_gx", 0.0), scene.value("ego_gy", 0.0)};
  const double far = cfg.arena.far_coordinate();
  for (int k = 0; k < cfg.task.num_neighbours; ++k) {
    ObsSlot slot;
    slot.state = AgentState{far, far, 0.0, 0.0};
    slot.goal = GoalSpec{far, far};
    slot.is_virtual = true;
    obs.neighbours.push_back(slot);
  }
  if (scene.contains("neighbours")) {
    const auto& arr = scene["neighbours"];
    if (!arr.is_array() || arr.size() > static_cast<std::size_t>(cfg.task.num_neighbours))
      throw DispatchError(DispatchStatus::kConfig,
                          "scene spec: neighbours must be a list of at most n entries");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const auto& nb = arr[k];
      obs.neighbours[k].state = AgentState{nb.value("px", 0.0), nb.value("py", 0.0),
                                           nb.value("vx", 0.0), nb.value("vy", 0.0)};
      obs.neighbours[k].goal =
          GoalSpec{nb.value("gx", nb.value("px", 0.0)), nb.value("gy", nb.value("py", 0.0))};
      obs.neighbours[k].is_virtual = false;
    }
  }

  const double z_max = nav->z_max();
  const double tol = 1e-4 * z_max;
  const double infeasible_sentinel = 2.0 * z_max;
  const int res = request.heatmap_res;
  const double x_min = scene.value("x_min", -cfg.arena.pos_bound);
  const double x_max = scene.value("x_max", cfg.arena.pos_bound);
  const double y_min = scene.value("y_min", -cfg.arena.pos_bound);
  const double y_max = scene.value("y_max", cfg.arena.pos_bound);

  std::vector<double> values(static_cast<std::size_t>(res) * res);
  parallel_for(
      res,
      [&](int iy) {
        Observation local = obs;
        for (int ix = 0; ix < res; ++ix) {
          local.ego.state.px = x_min + (x_max - x_min) * ix / (res - 1);
          local.ego.state.py = y_min + (y_max - y_min) * iy / (res - 1);
          const ZSearchResult zr = z_search(net, 0.0, local, z_max, tol);
          values[static_cast<std::size_t>(iy) * res + ix] =
              zr.feasible ? zr.z_star : infeasible_sentinel;
        }
      },
      cfg.workers);

  std::string csv = "x,y,value\n";
  char line[128];
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      const double x = x_min + (x_max - x_min) * ix / (res - 1);
      const double y = y_min + (y_max - y_min) * iy / (res - 1);
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", x, y,
                    values[static_cast<std::size_t>(iy) * res + ix]);
      csv += line;
    }
  }
  write_file_atomic(request.out_file, csv);
  const fs::path parent = fs::path(request.out_file).parent_path();
  record_artifacts(parent.empty() ? "." : parent.string(), "heatmap", {request.out_file});
  out << "heatmap " << res << "x" << res << " written to " << request.out_file << "\n";
  return 0;
}

// Recomputes the three metrics from the emitted trajectory and scenario
// logs and cross-checks the stored per-agent flags and costs.
int run_report(const DispatchRequest& request, std::ostream& out) {
  const RunConfig cfg = require_config(request);
  if (request.in_dir.empty()) throw DispatchError(DispatchStatus::kUsage, "report needs --in");
  const std::string traj_path = request.in_dir + "/trajectories.csv";
  const std::string scen_path = request.in_dir + "/scenarios.csv";
  const std::string traj = read_file(traj_path);
  const std::string scen = read_file(scen_path);

  struct AgentTrack {
    std::vector<double> px, py, times;
    double min_dist = std::numeric_limits<double>::infinity();
  };
  std::map<std::pair<long, long>, AgentTrack> tracks;  // (scenario, agent)

  std::stringstream ts(traj);
  std::string line;
  std::getline(ts, line);  // header
  while (std::getline(ts, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 14)
      throw DispatchError(DispatchStatus::kRuntime, "trajectory log: malformed row");
    const long scenario = std::stol(fields[0]);
    const long agent = std::stol(fields[3]);
    AgentTrack& track = tracks[{scenario, agent}];
    track.px.push_back(std::stod(fields[4]));
    track.py.push_back(std::stod(fields[5]));
    track.times.push_back(std::stod(fields[2]));
    track.min_dist = std::min(track.min_dist, std::stod(fields[13]));
  }

  std::map<std::pair<long, long>, std::tuple<std::uint64_t, double, double, bool>> stored;
  std::map<std::pair<long, long>, std::pair<double, double>> goals;
  std::stringstream ss(scen);
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9)
      throw DispatchError(DispatchStatus::kRuntime, "scenario log: malformed row");
    const long scenario = std::stol(fields[0]);
    const long agent = std::stol(fields[2]);
    goals[{scenario, agent}] = {std::stod(fields[5]), std::stod(fields[6])};
    stored[{scenario, agent}] = {std::stoull(fields[1]), std::stod(fields[8]),
                                 std::stod(fields[8]), fields[7] == "1"};
  }

  // Rebuild per-scenario results and feed the shared aggregator.
  std::map<long, ScenarioResult> rebuilt;
  for (const auto& [key, track] : tracks) {
    const auto [scenario, agent] = key;
    auto goal_it = goals.find(key);
    if (goal_it == goals.end())
      throw DispatchError(DispatchStatus::kRuntime, "scenario log: missing agent entry");
    const auto& [gx, gy] = goal_it->second;

    // Rows 0..N-1 are step starts, row N the terminal state.
    double cost = 0.0;
    const std::size_t n = track.px.size();
    if (n < 2) throw DispatchError(DispatchStatus::kRuntime, "trajectory log: truncated track");
    const double dt = track.times[1] - track.times[0];
    for (std::size_t s = 0; s + 1 < n; ++s)
      cost += std::hypot(track.px[s] - gx, track.py[s] - gy) * dt;
    cost += std::hypot(track.px[n - 1] - gx, track.py[n - 1] - gy);

    const bool collided = track.min_dist <= cfg.task.collision_radius;
    const auto& [seed, stored_cost, _, stored_flag] = stored[key];
    if (collided != stored_flag)
      throw DispatchError(DispatchStatus::kRuntime,
                          "report: collision flag mismatch with scenario log");
    if (std::abs(cost - stored_cost) > 1e-9)
      throw DispatchError(DispatchStatus::kRuntime,
                          "report: recomputed cost deviates from scenario log");

    ScenarioResult& r = rebuilt[scenario];
    r.config.scenario_id = static_cast<int>(scenario);
    r.config.seed = seed;
    r.collided.push_back(collided);
    r.agent_cost.push_back(cost);
  }
  std::vector<ScenarioResult> results;
  for (auto& [scenario, r] : rebuilt) {
    r.config.num_agents = static_cast<int>(r.collided.size());
    r.safe_scenario =
        std::none_of(r.collided.begin(), r.collided.end(), [](bool c) { return c; });
    results.push_back(std::move(r));
  }
  if (results.empty())
    throw DispatchError(DispatchStatus::kRuntime, "report: no trajectories found");

  const MetricsReport report = compute_metrics(results);
  const std::string text = metrics_report_text(report, "recomputed from " + traj_path);
  out << text;
  if (!request.out_file.empty()) {
    write_file_atomic(request.out_file, text);
    const fs::path parent = fs::path(request.out_file).parent_path();
    record_artifacts(parent.empty() ? "." : parent.string(), "report", {request.out_file});
  }
  return 0;
}

}  // namespace

int dispatch(const DispatchRequest& request, std::ostream& out, std::ostream& err) {
  try {
    if (request.command == "train-epigraph") return run_train_epigraph(request, out);
    if (request.command == "train-safety") return run_train_safety(request, out);
    if (request.command == "solve-grid") return run_solve_grid(request, out);
    if (request.command == "validate") return run_validate(request, out);
    if (request.command == "simulate") return run_simulate(request, out);
    if (request.command == "heatmap") return run_heatmap(request, out);
    if (request.command == "report") return run_report(request, out);
    err << "error: category=usage: unknown command '" << request.command << "'\n";
    return static_cast<int>(DispatchStatus::kUsage);
  } catch (const DispatchError& e) {
    err << "error: category=" << category_name(e.status) << ": " << e.what() << "\n";
    return static_cast<int>(e.status);
  } catch (const ConfigError& e) {
    err << "error: category=config: " << e.what() << "\n";
    return static_cast<int>(DispatchStatus::kConfig);
  } catch (const std::exception& e) {
    err << "error: category=runtime: " << e.what() << "\n";
    return static_cast<int>(DispatchStatus::kRuntime);
  }
}

}  // namespace hjnav
