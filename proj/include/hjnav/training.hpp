#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "hjnav/adam.hpp"
#include "hjnav/mlp.hpp"
#include "hjnav/rng.hpp"
#include "hjnav/scaling.hpp"

namespace hjnav {

/// Curriculum schedule: the sampled time window [t_min(k), T] opens
/// linearly backward from the terminal time, fully open after
/// curriculum_fraction * iterations.
struct CurriculumConfig {
  int iterations = 20000;
  double curriculum_fraction = 0.8;
  int batch_size = 512;
  std::uint64_t seed = 0;
};

/// Lower end of the sampling window at iteration k.
double curriculum_window_t_min(int k, const CurriculumConfig& config, double horizon);

/// A PDE-residual training problem over physical samples q (q[0] = time).
/// residual_loss returns |residual| for one sample given the residual
/// network value and its input gradient in network coordinates, and fills
/// the adjoints when requested.
class ResidualProblem {
 public:
  virtual ~ResidualProblem() = default;
  virtual int input_dim() const = 0;
  virtual double horizon() const = 0;
  virtual const InputScaler& scaler() const = 0;
  /// Fill q[1..] uniformly over the state box; q[0] is set by the caller.
  virtual void sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const = 0;
  virtual double residual_loss(const Eigen::VectorXd& q, double r_value,
                               const Eigen::Ref<const Eigen::VectorXd>& r_grad_norm,
                               double* d_value,
                               Eigen::VectorXd* d_grad_norm) const = 0;
};

/// Collocation batch: per-sample physical vectors, one column each.
struct CollocationBatch {
  Eigen::MatrixXd samples;  // d x B, physical coordinates, row 0 = t
  int size() const { return static_cast<int>(samples.cols()); }
};

/// Uniform collocation sampling: t ~ U(window), states per problem.
CollocationBatch sample_collocation(Rng& rng, double t_min, double t_max,
                                    const ResidualProblem& problem, int batch_size);

/// Mean absolute PDE residual of the batch (no gradients).
double residual_loss_mean(const ResidualProblem& problem, const NetParams& params,
                          const CollocationBatch& batch, int workers = 0);

/// Mean residual plus exact parameter gradient.
double residual_loss_gradient(const ResidualProblem& problem, const NetParams& params,
                              const CollocationBatch& batch, GradBuffers& grad,
                              int workers = 0);

struct TrainOptions {
  CurriculumConfig curriculum;
  AdamConfig adam;
  int log_interval = 100;
  int checkpoint_interval = 0;  // 0 = only final
  std::string checkpoint_path;  // empty = no checkpoints written
  std::string log_path;         // empty = in-memory log only
  bool log_timing = true;       // false writes wall_ms as 0 (reproducible logs)
  int workers = 0;
};

struct TrainLogRow {
  int iteration = 0;
  double t_min = 0.0;
  double loss = 0.0;
  long wall_ms = 0;
};

struct TrainOutcome {
  NetParams params;
  std::vector<TrainLogRow> log;
  bool nan_abort = false;
  int abort_iteration = -1;
  double final_loss = 0.0;
};

/// Curriculum training loop: sample, residual loss, Adam step. On a
/// non-finite loss the run aborts and the last good parameters are
/// checkpointed (when a checkpoint path is configured).
TrainOutcome train_residual_net(const ResidualProblem& problem, const TrainOptions& options,
                                NetParams initial);

struct ResidualStats {
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  int samples = 0;
};

/// Residual statistics on fresh uniform samples over [t_lo, t_hi].
ResidualStats validate_residual(const ResidualProblem& problem, const NetParams& params,
                                int n_samples, std::uint64_t seed, double t_lo = 0.0,
                                double t_hi = -1.0);

/// Serializes the training log; CSV columns: iteration,t_min,loss,wall_ms.
std::string train_log_csv(const std::vector<TrainLogRow>& log);

}  // namespace hjnav
