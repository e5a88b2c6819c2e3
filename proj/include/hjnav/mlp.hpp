#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace hjnav {

/// Architecture descriptor for the sinusoidal MLP. Hidden layers use sine
/// activations; the first layer's pre-activation is scaled by omega0. The
/// output layer is linear with a single unit.
struct Arch {
  int input_dim = 0;
  std::vector<int> hidden;
  double omega0 = 30.0;

  int num_linear_layers() const { return static_cast<int>(hidden.size()) + 1; }
  bool operator==(const Arch& o) const {
    return input_dim == o.input_dim && hidden == o.hidden && omega0 == o.omega0;
  }
};

/// Network parameters: one weight matrix (out x in) and bias per linear layer.
struct NetParams {
  Arch arch;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
      n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
    return n;
  }
  bool same_shape(const NetParams& o) const;
  bool all_finite() const;
};

/// Value and exact input gradient of a scalar-valued network.
struct EvalResult {
  double value = 0.0;
  Eigen::VectorXd input_gradient;
};

/// SIREN-style uniform initialization, deterministic per seed:
/// first layer U(-1/fan_in, 1/fan_in), deeper layers
/// U(-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0).
NetParams init_params(std::uint64_t seed, const Arch& arch);

/// Value-only forward pass.
double mlp_forward(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Forward value plus exact input gradient via forward-mode sensitivities.
EvalResult mlp_forward_with_input_grad(const NetParams& params,
                                       const Eigen::Ref<const Eigen::VectorXd>& x);

/// Intermediates of a batched forward pass, kept for the reverse pass.
/// Input Jacobians are stored dimension-major: jac[l] has shape
/// n_l x (d*B); the block [k*B, (k+1)*B) holds d(layer_l)/d(input_k) for
/// every sample, so activation scaling is a whole-matrix elementwise
/// product per input dimension instead of a per-sample loop.
struct MlpBatchTape {
  int batch = 0;
  Eigen::MatrixXd input;                 // d x B
  std::vector<Eigen::MatrixXd> preact;   // scaled pre-activations u_l, n_l x B
  std::vector<Eigen::MatrixXd> act;      // sin(u_l), n_l x B
  std::vector<Eigen::MatrixXd> jac_pre;  // G_l = W_l J_{l-1}, n_l x (d*B)
  std::vector<Eigen::MatrixXd> jac;      // J_l = omega_l cos(u_l) o G_l
  Eigen::RowVectorXd value;              // 1 x B
  Eigen::MatrixXd value_jac;             // d x B (input gradient per sample)
};

/// Batched forward pass with input Jacobians; X is d x B.
void mlp_forward_batch(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                       MlpBatchTape& tape);

/// Parameter-gradient accumulator shaped like NetParams.
struct GradBuffers {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  void init_like(const NetParams& params);
  void set_zero();
  void axpy(double a, const GradBuffers& other);  // this += a * other
  double squared_norm() const;
};

/// Per-sample loss: receives the sample index, network value and input
/// gradient (network coordinates), and must return the loss and fill the
/// adjoints d_value and d_grad (same length as the input).
using SampleLossFn = std::function<double(int sample, double value,
                                          const Eigen::Ref<const Eigen::VectorXd>& input_grad,
                                          double& d_value, Eigen::Ref<Eigen::VectorXd> d_grad)>;

/// Mean of per-sample losses over the batch plus its exact parameter
/// gradient, reverse-propagated through both the value and the input
/// gradient. Batch is sharded in fixed-size blocks and reduced in shard
/// order so results are bit-identical regardless of worker count.
/// Throws std::runtime_error naming the sample on non-finite intermediates.
double loss_param_gradient(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const SampleLossFn& loss, GradBuffers& grad, int workers = 0);

}  // namespace hjnav
