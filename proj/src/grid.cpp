#include "hjnav/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "hjnav/parallel.hpp"
#include "hjnav/rng.hpp"

namespace hjnav {

std::size_t GridField::size() const {
  std::size_t n = 1;
  for (const GridAxis& a : axes) n *= static_cast<std::size_t>(a.count);
  return n;
}

std::size_t GridField::stride(int dim) const {
  std::size_t s = 1;
  for (int d = dims() - 1; d > dim; --d) s *= static_cast<std::size_t>(axes[d].count);
  return s;
}

std::size_t GridField::flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dims(); ++d) flat = flat * axes[d].count + idx[d];
  return flat;
}

void GridField::node_coords(std::size_t flat, double* out) const {
  for (int d = dims() - 1; d >= 0; --d) {
    const int c = axes[d].count;
    out[d] = axes[d].coord(static_cast<int>(flat % c));
    flat /= c;
  }
}

namespace {

void validate_axes(const std::vector<GridAxis>& axes) {
  if (axes.empty()) throw std::invalid_argument("grid: no axes");
  for (const GridAxis& a : axes) {
    if (a.count < 3) throw std::invalid_argument("grid: need at least 3 points per axis");
    if (!(a.hi > a.lo)) throw std::invalid_argument("grid: invalid axis bounds");
  }
}

void check_memory(const std::vector<GridAxis>& axes, double cap_bytes, int resident_fields) {
  std::size_t n = 1;
  for (const GridAxis& a : axes) n *= static_cast<std::size_t>(a.count);
  const double needed = static_cast<double>(n) * sizeof(double) * resident_fields;
  if (needed > cap_bytes) {
    throw std::runtime_error("grid: estimated memory " + std::to_string(needed / 1048576.0) +
                             " MiB exceeds cap " + std::to_string(cap_bytes / 1048576.0) +
                             " MiB");
  }
}

}  // namespace

GridField build_grid(const std::vector<GridAxis>& axes,
                     const std::function<double(const double*)>& terminal,
                     double memory_cap_bytes) {
  validate_axes(axes);
  check_memory(axes, memory_cap_bytes, 1);
  GridField field;
  field.axes = axes;
  field.values.resize(field.size());
  std::vector<double> x(axes.size());
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    field.node_coords(i, x.data());
    field.values[i] = terminal(x.data());
  }
  return field;
}

GridField lf_step(const GridField& field, double dt, const GridProblem& problem, int workers) {
  const int D = field.dims();
  if (static_cast<int>(problem.alpha.size()) != D)
    throw std::invalid_argument("lf_step: alpha count mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("lf_step: dt must be positive");

  double max_dt = std::numeric_limits<double>::infinity();
  for (int d = 0; d < D; ++d)
    if (problem.alpha[d] > 0.0)
      max_dt = std::min(max_dt, 0.5 * field.axes[d].spacing() / problem.alpha[d]);
  if (dt > max_dt * (1.0 + 1e-12))
    throw std::runtime_error("lf_step: CFL violation, max admissible dt = " +
                             std::to_string(max_dt));

  GridField next;
  next.axes = field.axes;
  next.time = field.time - dt;
  next.values.resize(field.size());

  const int last_count = field.axes[D - 1].count;
  const std::size_t n_rows = field.size() / last_count;
  std::vector<std::size_t> strides(D);
  for (int d = 0; d < D; ++d) strides[d] = field.stride(d);

  parallel_for(
      static_cast<int>(n_rows),
      [&](int row) {
        std::vector<int> idx(D);
        {
          std::size_t r = static_cast<std::size_t>(row);
          for (int d = D - 2; d >= 0; --d) {
            idx[d] = static_cast<int>(r % field.axes[d].count);
            r /= field.axes[d].count;
          }
          idx[D - 1] = 0;
        }
        std::vector<double> x(D);
        for (int d = 0; d < D - 1; ++d) x[d] = field.axes[d].coord(idx[d]);

        std::vector<double> p(D);
        const std::size_t base = static_cast<std::size_t>(row) * last_count;
        for (int k = 0; k < last_count; ++k) {
          const std::size_t flat = base + k;
          idx[D - 1] = k;
          x[D - 1] = field.axes[D - 1].coord(k);

          double dissipation = 0.0;
          for (int d = 0; d < D; ++d) {
            const double h = field.axes[d].spacing();
            const int i = idx[d];
            const int c = field.axes[d].count;
            const double v = field.values[flat];
            // One-sided differences at the faces (D+ = D- there).
            const double fwd =
                (i + 1 < c) ? (field.values[flat + strides[d]] - v) / h
                            : (v - field.values[flat - strides[d]]) / h;
            const double bwd =
                (i > 0) ? (v - field.values[flat - strides[d]]) / h
                        : (field.values[flat + strides[d]] - v) / h;
            p[d] = 0.5 * (fwd + bwd);
            dissipation += problem.alpha[d] * 0.5 * (fwd - bwd);
          }

          double v_new = field.values[flat] + dt * (problem.hamiltonian(x.data(), p.data()) +
                                                    dissipation);
          const double bound = problem.clamp_fn(x.data());
          v_new = problem.mode == GridMode::kReachVi ? std::min(v_new, bound)
                                                     : std::max(v_new, bound);
          next.values[flat] = v_new;
        }
      },
      workers);

  return next;
}

GridSolveResult solve_grid(const GridProblem& problem, const GridSolveOptions& options) {
  validate_axes(problem.axes);
  const int resident = 2 + static_cast<int>(options.store_times.size());
  check_memory(problem.axes, options.memory_cap_bytes, resident);

  double stability_dt = std::numeric_limits<double>::infinity();
  double spec_dt = std::numeric_limits<double>::infinity();
  double alpha_over_h = 0.0;
  for (std::size_t d = 0; d < problem.axes.size(); ++d) {
    const double h = problem.axes[d].spacing();
    if (problem.alpha[d] > 0.0) spec_dt = std::min(spec_dt, 0.5 * h / problem.alpha[d]);
    alpha_over_h += problem.alpha[d] / h;
  }
  if (alpha_over_h > 0.0) stability_dt = options.cfl_safety / alpha_over_h;
  const double dt_target = std::min(spec_dt, stability_dt);
  const int steps = std::max(1, static_cast<int>(std::ceil(options.horizon / dt_target)));
  const double dt = options.horizon / steps;

  GridSolveResult result;
  result.steps = steps;
  result.dt = dt;

  GridField field = build_grid(problem.axes, problem.terminal, options.memory_cap_bytes);
  field.time = options.horizon;

  // Requested slice times snap to the nearest step boundary.
  std::vector<int> store_steps;
  for (double t_req : options.store_times) {
    const int s = static_cast<int>(std::llround((options.horizon - t_req) / dt));
    store_steps.push_back(std::clamp(s, 0, steps));
  }
  for (std::size_t i = 0; i < store_steps.size(); ++i)
    if (store_steps[i] == 0) result.stored.push_back(field);

  for (int s = 1; s <= steps; ++s) {
    GridField next = lf_step(field, dt, problem, options.workers);
    if (problem.mode == GridMode::kReachVi) {
      // Running-minimum structure: a longer horizon can only lower the
      // value, so clamp each slice by its successor (removes the scheme's
      // small monotonicity violations).
      for (std::size_t i = 0; i < next.values.size(); ++i)
        next.values[i] = std::min(next.values[i], field.values[i]);
    }
    field = std::move(next);
    field.time = options.horizon - s * dt;  // avoid drift from repeated subtraction
    for (std::size_t i = 0; i < store_steps.size(); ++i)
      if (store_steps[i] == s) result.stored.push_back(field);
  }
  result.final_field = std::move(field);
  return result;
}

double interpolate(const GridField& field, const Eigen::Ref<const Eigen::VectorXd>& point) {
  const int D = field.dims();
  if (point.size() != D) throw std::invalid_argument("interpolate: dimension mismatch");

  std::vector<int> lo_idx(D);
  std::vector<double> frac(D);
  for (int d = 0; d < D; ++d) {
    const GridAxis& a = field.axes[d];
    const double clamped = std::clamp(point[d], a.lo, a.hi);
    const double u = (clamped - a.lo) / a.spacing();
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, a.count - 2);
    lo_idx[d] = i;
    frac[d] = std::clamp(u - i, 0.0, 1.0);
  }

  // Accumulate over the 2^D corners.
  const int corners = 1 << D;
  double value = 0.0;
  std::vector<int> idx(D);
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int d = 0; d < D; ++d) {
      const bool hi = (c >> d) & 1;
      idx[d] = lo_idx[d] + (hi ? 1 : 0);
      w *= hi ? frac[d] : (1.0 - frac[d]);
    }
    if (w != 0.0) value += w * field.values[field.flat_index(idx)];
  }
  return value;
}

CompareReport compare(const GridField& field,
                      const std::function<double(const Eigen::VectorXd&)>& evaluator,
                      const CompareSpec& spec) {
  CompareReport report;
  const std::size_t total = field.size();
  const long n_points = spec.max_points > 0
                            ? std::min<long>(spec.max_points, static_cast<long>(total))
                            : static_cast<long>(total);
  Rng rng(Rng::mix(spec.seed, 0x636d7072u));

  Eigen::VectorXd x(field.dims());
  std::vector<double> coords(field.dims());
  double agree = 0;
  double mae_sum = 0.0;
  for (long k = 0; k < n_points; ++k) {
    const std::size_t flat = spec.max_points > 0
                                 ? static_cast<std::size_t>(rng.uniform_index(total))
                                 : static_cast<std::size_t>(k);
    field.node_coords(flat, coords.data());
    for (int d = 0; d < field.dims(); ++d) x[d] = coords[d];
    const double v_grid = field.values[flat];
    const double v_net = evaluator(x);
    const double err = std::abs(v_net - v_grid);
    report.max_abs_err = std::max(report.max_abs_err, err);
    if (std::abs(v_grid) > spec.margin) {
      ++report.n_confident;
      mae_sum += err;
      if ((v_grid > 0.0) == (v_net > 0.0)) ++agree;
    }
  }
  report.n_points = n_points;
  if (report.n_confident > 0) {
    report.sign_agreement_pct = 100.0 * agree / report.n_confident;
    report.mae_confident = mae_sum / report.n_confident;
  }
  return report;
}

namespace {
constexpr char kGridMagic[4] = {'H', 'J', 'G', 'D'};
constexpr std::uint16_t kGridVersion = 1;
}  // namespace

void save_grid(const std::string& path, const GridField& field) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("grid dump: cannot open " + tmp);
    os.write(kGridMagic, 4);
    os.write(reinterpret_cast<const char*>(&kGridVersion), sizeof(kGridVersion));
    const std::uint32_t dims = static_cast<std::uint32_t>(field.dims());
    os.write(reinterpret_cast<const char*>(&dims), sizeof(dims));
    for (const GridAxis& a : field.axes) {
      os.write(reinterpret_cast<const char*>(&a.lo), sizeof(double));
      os.write(reinterpret_cast<const char*>(&a.hi), sizeof(double));
      const std::uint32_t c = static_cast<std::uint32_t>(a.count);
      os.write(reinterpret_cast<const char*>(&c), sizeof(c));
    }
    os.write(reinterpret_cast<const char*>(&field.time), sizeof(double));
    os.write(reinterpret_cast<const char*>(field.values.data()),
             static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("grid dump: write failed");
  }
  std::filesystem::rename(tmp, path);
}

GridField load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("grid dump: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kGridMagic, 4) != 0)
    throw std::runtime_error("grid dump: bad magic");
  std::uint16_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kGridVersion) throw std::runtime_error("grid dump: unsupported version");
  std::uint32_t dims = 0;
  is.read(reinterpret_cast<char*>(&dims), sizeof(dims));
  if (!is || dims == 0 || dims > 8) throw std::runtime_error("grid dump: implausible dims");
  GridField field;
  field.axes.resize(dims);
  for (GridAxis& a : field.axes) {
    std::uint32_t c = 0;
    is.read(reinterpret_cast<char*>(&a.lo), sizeof(double));
    is.read(reinterpret_cast<char*>(&a.hi), sizeof(double));
    is.read(reinterpret_cast<char*>(&c), sizeof(c));
    a.count = static_cast<int>(c);
  }
  is.read(reinterpret_cast<char*>(&field.time), sizeof(double));
  if (!is) throw std::runtime_error("grid dump: truncated header");
  field.values.resize(field.size());
  is.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!is) throw std::runtime_error("grid dump: truncated payload");
  return field;
}

GridProblem make_safety_vi_grid(const SafetyProblemParams& params, int points_per_axis) {
  GridProblem p;
  p.mode = GridMode::kReachVi;
  p.axes = {GridAxis{-params.rel_pos_bound, params.rel_pos_bound, points_per_axis},
            GridAxis{-params.rel_pos_bound, params.rel_pos_bound, points_per_axis},
            GridAxis{-params.rel_vel_bound, params.rel_vel_bound, points_per_axis},
            GridAxis{-params.rel_vel_bound, params.rel_vel_bound, points_per_axis}};
  const double r = params.collision_radius;
  p.terminal = [r](const double* x) { return std::sqrt(x[0] * x[0] + x[1] * x[1]) - r; };
  p.clamp_fn = p.terminal;
  const double two_a = 2.0 * params.accel_bound;
  p.hamiltonian = [two_a](const double* x, const double* pg) {
    return pg[0] * x[2] + pg[1] * x[3] + two_a * (std::abs(pg[2]) + std::abs(pg[3]));
  };
  p.alpha = {params.rel_vel_bound, params.rel_vel_bound, two_a, two_a};
  return p;
}

GridProblem make_fleeing_vi_grid(double speed_bound, double collision_radius, double pos_bound,
                                 int points_per_axis) {
  GridProblem p;
  p.mode = GridMode::kReachVi;
  p.axes = {GridAxis{-pos_bound, pos_bound, points_per_axis},
            GridAxis{-pos_bound, pos_bound, points_per_axis}};
  p.terminal = [collision_radius](const double* x) {
    return std::sqrt(x[0] * x[0] + x[1] * x[1]) - collision_radius;
  };
  p.clamp_fn = p.terminal;
  const double two_v = 2.0 * speed_bound;
  p.hamiltonian = [two_v](const double*, const double* pg) {
    return two_v * (std::abs(pg[0]) + std::abs(pg[1]));
  };
  p.alpha = {two_v, two_v};
  return p;
}

GridProblem make_double1d_epigraph_grid(const Double1DParams& params, int points_per_axis) {
  GridProblem p;
  p.mode = GridMode::kEpigraphHjb;
  const double z_max = params.resolved_z_max();
  // Axis order matches the net's state layout [z, x, v].
  p.axes = {GridAxis{0.0, z_max, points_per_axis},
            GridAxis{-params.x_bound, params.x_bound, points_per_axis},
            GridAxis{-params.v_bound, params.v_bound, points_per_axis}};
  const double goal = params.goal_x;
  const double oc = params.obstacle_center;
  const double ow = params.obstacle_halfwidth;
  p.terminal = [goal, oc, ow](const double* x) {
    return std::max(std::abs(x[1] - goal) - x[0], ow - std::abs(x[1] - oc));
  };
  p.clamp_fn = [oc, ow](const double* x) { return ow - std::abs(x[1] - oc); };
  const double a_max = params.accel_bound;
  p.hamiltonian = [goal, a_max](const double* x, const double* pg) {
    return -pg[0] * std::abs(x[1] - goal) + pg[1] * x[2] - a_max * std::abs(pg[2]);
  };
  const double l_max = params.x_bound + std::abs(params.goal_x);
  p.alpha = {l_max, params.v_bound, a_max};
  return p;
}

}  // namespace hjnav
