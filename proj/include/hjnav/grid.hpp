#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hjnav/epigraph.hpp"
#include "hjnav/safety.hpp"

namespace hjnav {

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 0;

  double spacing() const { return (hi - lo) / (count - 1); }
  double coord(int i) const { return lo + i * spacing(); }
};

/// Dense value field on a rectilinear grid, row-major with the last axis
/// fastest.
struct GridField {
  std::vector<GridAxis> axes;
  std::vector<double> values;
  double time = 0.0;

  int dims() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  std::size_t stride(int dim) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  void node_coords(std::size_t flat, double* out) const;
};

enum class GridMode {
  kReachVi,      // min(dV/dt + H, psi - V) = 0, clamp V <- min(V, psi)
  kEpigraphHjb,  // min(-dV/dt - H, V - g) = 0, clamp V <- max(V, g)
};

/// One backward-time HJ problem for the Lax-Friedrichs solver. hamiltonian
/// receives node coordinates and the central gradient; alpha[i] bounds
/// |dH/dp_i| over the grid.
struct GridProblem {
  std::vector<GridAxis> axes;
  GridMode mode = GridMode::kReachVi;
  std::function<double(const double* x)> terminal;
  std::function<double(const double* x)> clamp_fn;  // psi (VI) or g (epigraph)
  std::function<double(const double* x, const double* p)> hamiltonian;
  std::vector<double> alpha;
};

/// Terminal-time field: terminal function sampled at the nodes. Throws if
/// the estimated working memory would exceed memory_cap_bytes.
GridField build_grid(const std::vector<GridAxis>& axes,
                     const std::function<double(const double*)>& terminal,
                     double memory_cap_bytes = 4.0 * 1073741824.0);

/// One explicit backward Euler step with the Lax-Friedrichs numerical
/// Hamiltonian (central gradients plus dissipation sum alpha_i*(D+ - D-)/2),
/// one-sided differences at boundary faces, followed by the variational
/// clamp of the mode. Enforces the CFL precondition
/// dt <= 0.5 * min(spacing_i / alpha_i).
GridField lf_step(const GridField& field, double dt, const GridProblem& problem,
                  int workers = 0);

struct GridSolveOptions {
  double horizon = 0.2;
  double cfl_safety = 0.8;                       // fraction of the stability bound
  std::vector<double> store_times;               // slice times to keep
  double memory_cap_bytes = 4.0 * 1073741824.0;  // 4 GiB
  int workers = 0;
};

struct GridSolveResult {
  GridField final_field;            // t = 0
  std::vector<GridField> stored;    // requested slices (nearest step)
  int steps = 0;
  double dt = 0.0;
};

/// Marches the terminal field backward from t = horizon to t = 0.
GridSolveResult solve_grid(const GridProblem& problem, const GridSolveOptions& options);

/// Multilinear interpolation; queries outside the bounds clamp to the faces.
double interpolate(const GridField& field, const Eigen::Ref<const Eigen::VectorXd>& point);

struct CompareSpec {
  long max_points = 0;   // 0 = every node; otherwise uniformly sampled nodes
  double margin = 0.05;  // |V_grid| > margin defines the confident set
  std::uint64_t seed = 0;
};

struct CompareReport {
  double sign_agreement_pct = 0.0;  // on the confident set
  double mae_confident = 0.0;
  double max_abs_err = 0.0;  // over all compared points
  long n_confident = 0;
  long n_points = 0;
};

/// Compares the grid field against a pointwise evaluator (typically a
/// trained net bound at the field's time).
CompareReport compare(const GridField& field,
                      const std::function<double(const Eigen::VectorXd&)>& evaluator,
                      const CompareSpec& spec);

/// Binary dump: magic "HJGD" | u16 version | u32 dims | per dim (f64 lo,
/// f64 hi, u32 count) | f64 time | values as little-endian f64.
void save_grid(const std::string& path, const GridField& field);
GridField load_grid(const std::string& path);

/// Problem builders for the supported instances.
GridProblem make_safety_vi_grid(const SafetyProblemParams& params, int points_per_axis);
GridProblem make_fleeing_vi_grid(double speed_bound, double collision_radius, double pos_bound,
                                 int points_per_axis);
GridProblem make_double1d_epigraph_grid(const Double1DParams& params, int points_per_axis);

}  // namespace hjnav
