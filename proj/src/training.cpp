#include "hjnav/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "hjnav/checkpoint.hpp"

namespace hjnav {

double curriculum_window_t_min(int k, const CurriculumConfig& config, double horizon) {
  if (k < 0 || k > config.iterations)
    throw std::invalid_argument("curriculum_window_t_min: iteration outside [0, K]");
  const double open_after = config.curriculum_fraction * config.iterations;
  const double progress = open_after > 0.0 ? std::min(1.0, k / open_after) : 1.0;
  return horizon * (1.0 - progress);
}

CollocationBatch sample_collocation(Rng& rng, double t_min, double t_max,
                                    const ResidualProblem& problem, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("sample_collocation: batch size must be >= 1");
  CollocationBatch batch;
  batch.samples.resize(problem.input_dim(), batch_size);
  for (int b = 0; b < batch_size; ++b) {
    auto col = batch.samples.col(b);
    col[0] = t_min == t_max ? t_min : rng.uniform(t_min, t_max);
    problem.sample_state(rng, col);
  }
  return batch;
}

namespace {

// Normalized input matrix for a physical batch.
Eigen::MatrixXd normalize_batch(const InputScaler& scaler, const Eigen::MatrixXd& q) {
  Eigen::MatrixXd out(q.rows(), q.cols());
  for (Eigen::Index b = 0; b < q.cols(); ++b) out.col(b) = scaler.normalize(q.col(b));
  return out;
}

}  // namespace

double residual_loss_gradient(const ResidualProblem& problem, const NetParams& params,
                              const CollocationBatch& batch, GradBuffers& grad, int workers) {
  const Eigen::MatrixXd X = normalize_batch(problem.scaler(), batch.samples);
  return loss_param_gradient(
      params, X,
      [&](int sample, double value, const Eigen::Ref<const Eigen::VectorXd>& input_grad,
          double& d_value, Eigen::Ref<Eigen::VectorXd> d_grad) {
        Eigen::VectorXd dg(input_grad.size());
        const double loss =
            problem.residual_loss(batch.samples.col(sample), value, input_grad, &d_value, &dg);
        d_grad = dg;
        return loss;
      },
      grad, workers);
}

double residual_loss_mean(const ResidualProblem& problem, const NetParams& params,
                          const CollocationBatch& batch, int workers) {
  (void)workers;
  const int B = batch.size();
  double total = 0.0;
  for (int b = 0; b < B; ++b) {
    const Eigen::VectorXd q = batch.samples.col(b);
    const EvalResult r = mlp_forward_with_input_grad(params, problem.scaler().normalize(q));
    const double li = problem.residual_loss(q, r.value, r.input_gradient, nullptr, nullptr);
    if (!std::isfinite(li))
      throw std::runtime_error("residual_loss_mean: non-finite residual at sample " +
                               std::to_string(b));
    total += li;
  }
  return total / B;
}

TrainOutcome train_residual_net(const ResidualProblem& problem, const TrainOptions& options,
                                NetParams initial) {
  const CurriculumConfig& cur = options.curriculum;
  if (cur.iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
  if (!(cur.curriculum_fraction > 0.0 && cur.curriculum_fraction <= 1.0))
    throw std::invalid_argument("train: curriculum_fraction must be in (0, 1]");
  if (cur.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");

  TrainOutcome outcome;
  outcome.params = std::move(initial);
  AdamState adam = AdamState::create(options.adam, outcome.params);
  Rng rng(Rng::mix(cur.seed, 0x74726169u));
  GradBuffers grad;

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    if (!options.log_timing) return 0L;
    return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t_start)
                                 .count());
  };
  auto checkpoint = [&](const NetParams& p) {
    if (!options.checkpoint_path.empty())
      save_checkpoint(options.checkpoint_path, Checkpoint{p, problem.scaler()});
  };

  const double T = problem.horizon();
  for (int k = 0; k < cur.iterations; ++k) {
    const double t_min = curriculum_window_t_min(k, cur, T);
    const CollocationBatch batch = sample_collocation(rng, t_min, T, problem, cur.batch_size);

    double loss = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    try {
      loss = residual_loss_gradient(problem, outcome.params, batch, grad, options.workers);
    } catch (const std::invalid_argument&) {
      throw;  // caller error, not a numeric failure
    } catch (const std::exception&) {
      failed = true;
    }
    if (failed || !std::isfinite(loss)) {
      // Abort preserving the last good parameters (the update is not applied).
      outcome.nan_abort = true;
      outcome.abort_iteration = k;
      checkpoint(outcome.params);
      return outcome;
    }

    adam_step(adam, outcome.params, grad);

    if (options.log_interval > 0 &&
        (k % options.log_interval == 0 || k + 1 == cur.iterations)) {
      outcome.log.push_back(TrainLogRow{k, t_min, loss, elapsed_ms()});
    }
    if (options.checkpoint_interval > 0 && k > 0 && k % options.checkpoint_interval == 0)
      checkpoint(outcome.params);
    outcome.final_loss = loss;
  }

  checkpoint(outcome.params);
  if (!options.log_path.empty()) {
    const std::string tmp = options.log_path + ".tmp";
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("train: cannot write log: " + options.log_path);
    os << train_log_csv(outcome.log);
    os.close();
    std::rename(tmp.c_str(), options.log_path.c_str());
  }
  return outcome;
}

ResidualStats validate_residual(const ResidualProblem& problem, const NetParams& params,
                                int n_samples, std::uint64_t seed, double t_lo, double t_hi) {
  if (n_samples < 1) throw std::invalid_argument("validate_residual: need samples");
  if (t_hi < 0.0) t_hi = problem.horizon();
  Rng rng(Rng::mix(seed, 0x76616c69u));
  const CollocationBatch batch = sample_collocation(rng, t_lo, t_hi, problem, n_samples);

  std::vector<double> residuals(n_samples);
  double total = 0.0;
  for (int b = 0; b < n_samples; ++b) {
    const Eigen::VectorXd q = batch.samples.col(b);
    const EvalResult r = mlp_forward_with_input_grad(params, problem.scaler().normalize(q));
    residuals[b] = problem.residual_loss(q, r.value, r.input_gradient, nullptr, nullptr);
    total += residuals[b];
  }
  std::sort(residuals.begin(), residuals.end());
  ResidualStats stats;
  stats.samples = n_samples;
  stats.mean = total / n_samples;
  stats.p95 = residuals[static_cast<std::size_t>(std::min<double>(
      n_samples - 1, std::floor(0.95 * (n_samples - 1))))];
  stats.max = residuals.back();
  return stats;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "iteration,t_min,loss,wall_ms\n";
  char line[160];
  for (const TrainLogRow& row : log) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%ld\n", row.iteration, row.t_min, row.loss,
                  row.wall_ms);
    out += line;
  }
  return out;
}

}  // namespace hjnav
