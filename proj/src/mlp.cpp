#include "hjnav/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hjnav/parallel.hpp"
#include "hjnav/rng.hpp"

namespace hjnav {

namespace {

// Fixed shard width for batch work: shard boundaries are independent of the
// worker count, and shard results reduce in index order, so gradients are
// bit-identical for any number of threads.
constexpr int kShardSize = 64;

void validate_arch(const Arch& arch) {
  if (arch.input_dim <= 0) throw std::invalid_argument("arch: input_dim must be positive");
  for (int h : arch.hidden)
    if (h <= 0) throw std::invalid_argument("arch: zero-sized hidden layer");
  if (!(arch.omega0 > 0.0)) throw std::invalid_argument("arch: omega0 must be positive");
}

}  // namespace

bool NetParams::same_shape(const NetParams& o) const {
  if (weights.size() != o.weights.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != o.weights[l].rows() || weights[l].cols() != o.weights[l].cols())
      return false;
    if (biases[l].size() != o.biases[l].size()) return false;
  }
  return true;
}

bool NetParams::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

NetParams init_params(std::uint64_t seed, const Arch& arch) {
  validate_arch(arch);
  NetParams p;
  p.arch = arch;
  Rng rng(Rng::mix(seed, 0x6e657470u));  // independent of other streams per seed

  std::vector<int> sizes;
  sizes.push_back(arch.input_dim);
  for (int h : arch.hidden) sizes.push_back(h);
  sizes.push_back(1);

  const int L = arch.num_linear_layers();
  p.weights.resize(L);
  p.biases.resize(L);
  for (int l = 0; l < L; ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = (l == 0) ? 1.0 / fan_in
                                  : std::sqrt(6.0 / fan_in) / arch.omega0;
    p.weights[l].resize(fan_out, fan_in);
    p.biases[l].resize(fan_out);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) p.weights[l](i, j) = rng.uniform(-bound, bound);
    for (int i = 0; i < fan_out; ++i) p.biases[l](i) = rng.uniform(-bound, bound);
  }
  return p;
}

double mlp_forward(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != params.arch.input_dim)
    throw std::invalid_argument("mlp_forward: input length mismatch");
  const int L = params.arch.num_linear_layers();
  Eigen::VectorXd a = x;
  for (int l = 0; l < L - 1; ++l) {
    const double omega = (l == 0) ? params.arch.omega0 : 1.0;
    a = ((params.weights[l] * a + params.biases[l]) * omega).array().sin();
  }
  return (params.weights[L - 1] * a + params.biases[L - 1])(0);
}

EvalResult mlp_forward_with_input_grad(const NetParams& params,
                                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != params.arch.input_dim)
    throw std::invalid_argument("mlp_forward_with_input_grad: input length mismatch");
  if (!x.allFinite())
    throw std::runtime_error("mlp_forward_with_input_grad: non-finite input");
  const int d = params.arch.input_dim;
  const int L = params.arch.num_linear_layers();

  Eigen::VectorXd a = x;
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(d, d);
  for (int l = 0; l < L - 1; ++l) {
    const double omega = (l == 0) ? params.arch.omega0 : 1.0;
    const Eigen::VectorXd u = (params.weights[l] * a + params.biases[l]) * omega;
    const Eigen::MatrixXd G = params.weights[l] * J;
    a = u.array().sin();
    J = (omega * u.array().cos()).matrix().asDiagonal() * G;
  }
  EvalResult out;
  out.value = (params.weights[L - 1] * a + params.biases[L - 1])(0);
  out.input_gradient = (params.weights[L - 1] * J).transpose();
  return out;
}

void mlp_forward_batch(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                       MlpBatchTape& tape) {
  const int d = params.arch.input_dim;
  const int B = static_cast<int>(X.cols());
  if (X.rows() != d) throw std::invalid_argument("mlp_forward_batch: input rows mismatch");
  const int L = params.arch.num_linear_layers();
  const int H = L - 1;

  tape.batch = B;
  tape.input = X;
  tape.preact.assign(H, {});
  tape.act.assign(H, {});
  tape.jac_pre.assign(H, {});
  tape.jac.assign(H, {});

  for (int l = 0; l < H; ++l) {
    const double omega = (l == 0) ? params.arch.omega0 : 1.0;
    const Eigen::MatrixXd& a_prev = (l == 0) ? tape.input : tape.act[l - 1];
    const int n = static_cast<int>(params.weights[l].rows());

    tape.preact[l] = ((params.weights[l] * a_prev).colwise() + params.biases[l]) * omega;
    tape.act[l] = tape.preact[l].array().sin();

    // G_l = W_l J_{l-1}; J_0 block k is e_k replicated, so G_1 block k
    // replicates column k of W_1.
    Eigen::MatrixXd& G = tape.jac_pre[l];
    if (l == 0) {
      G.resize(n, static_cast<Eigen::Index>(d) * B);
      for (int k = 0; k < d; ++k) G.middleCols(k * B, B).colwise() = params.weights[0].col(k);
    } else {
      G.noalias() = params.weights[l] * tape.jac[l - 1];
    }
    Eigen::MatrixXd& J = tape.jac[l];
    J.resize(n, static_cast<Eigen::Index>(d) * B);
    const Eigen::ArrayXXd cos_u = omega * tape.preact[l].array().cos();
    for (int k = 0; k < d; ++k)
      J.middleCols(k * B, B).array() = cos_u * G.middleCols(k * B, B).array();
  }

  const Eigen::MatrixXd& a_last = (H == 0) ? tape.input : tape.act[H - 1];
  tape.value = (params.weights[L - 1] * a_last).row(0).array() + params.biases[L - 1](0);
  tape.value_jac.resize(d, B);
  if (H == 0) {
    for (int b = 0; b < B; ++b) tape.value_jac.col(b) = params.weights[L - 1].row(0).transpose();
  } else {
    const Eigen::MatrixXd row = params.weights[L - 1] * tape.jac[H - 1];  // 1 x (d*B)
    for (int k = 0; k < d; ++k)
      tape.value_jac.row(k) = row.middleCols(k * B, B);
  }
}

void GradBuffers::init_like(const NetParams& params) {
  weights.resize(params.weights.size());
  biases.resize(params.biases.size());
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    weights[l].setZero(params.weights[l].rows(), params.weights[l].cols());
    biases[l].setZero(params.biases[l].size());
  }
}

void GradBuffers::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void GradBuffers::axpy(double a, const GradBuffers& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += a * other.weights[l];
    biases[l] += a * other.biases[l];
  }
}

double GradBuffers::squared_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    s += weights[l].squaredNorm() + biases[l].squaredNorm();
  return s;
}

namespace {

// Reverse pass over one shard's tape. value_bar is 1 x B, jac_bar is d x B
// (per-sample adjoint of the input gradient). Accumulates raw sums into
// grad. Jacobian adjoints use the tape's dimension-major layout.
void mlp_backward_shard(const NetParams& params, const MlpBatchTape& tape,
                        const Eigen::RowVectorXd& value_bar, const Eigen::MatrixXd& jac_bar,
                        GradBuffers& grad) {
  const int d = params.arch.input_dim;
  const int B = tape.batch;
  const int L = params.arch.num_linear_layers();
  const int H = L - 1;

  // Spread jac_bar rows into the dimension-major flat layout.
  Eigen::MatrixXd jy_flat(1, static_cast<Eigen::Index>(d) * B);
  for (int k = 0; k < d; ++k) jy_flat.middleCols(k * B, B) = jac_bar.row(k);

  const Eigen::MatrixXd& a_last = (H == 0) ? tape.input : tape.act[H - 1];
  grad.weights[L - 1].noalias() += value_bar * a_last.transpose();
  grad.biases[L - 1](0) += value_bar.sum();

  if (H == 0) {
    // Linear model: the input-gradient path adds sum of jac_bar columns.
    for (int k = 0; k < d; ++k) grad.weights[0](0, k) += jac_bar.row(k).sum();
    return;
  }

  grad.weights[L - 1].noalias() += jy_flat * tape.jac[H - 1].transpose();

  Eigen::MatrixXd a_bar = params.weights[L - 1].transpose() * value_bar;   // n x B
  Eigen::MatrixXd j_bar = params.weights[L - 1].transpose() * jy_flat;     // n x (d*B)

  for (int l = H - 1; l >= 0; --l) {
    const double omega = (l == 0) ? params.arch.omega0 : 1.0;
    const Eigen::ArrayXXd cos_u = tape.preact[l].array().cos();
    const Eigen::ArrayXXd& sin_u = tape.act[l].array();  // a_l = sin(u_l)

    Eigen::MatrixXd u_bar = (cos_u * a_bar.array()).matrix();
    Eigen::MatrixXd g_bar(j_bar.rows(), j_bar.cols());
    // dJ_l[i,:]/du_l[i] = -omega * sin(u_l[i]) * G_l[i,:], accumulated over
    // the dimension blocks.
    Eigen::ArrayXXd jdotg = Eigen::ArrayXXd::Zero(j_bar.rows(), B);
    for (int k = 0; k < d; ++k) {
      auto jb = j_bar.middleCols(k * B, B).array();
      auto gb = tape.jac_pre[l].middleCols(k * B, B).array();
      g_bar.middleCols(k * B, B).array() = omega * cos_u * jb;
      jdotg += jb * gb;
    }
    u_bar.array() += -omega * sin_u * jdotg;
    const Eigen::MatrixXd z_bar = omega * u_bar;

    const Eigen::MatrixXd& a_prev = (l == 0) ? tape.input : tape.act[l - 1];
    grad.weights[l].noalias() += z_bar * a_prev.transpose();
    grad.biases[l] += z_bar.rowwise().sum();
    if (l == 0) {
      // J_0 block k replicates e_k: the Jacobian-path weight gradient is
      // the per-block row sum.
      for (int k = 0; k < d; ++k)
        grad.weights[0].col(k) += g_bar.middleCols(k * B, B).rowwise().sum();
    } else {
      grad.weights[l].noalias() += g_bar * tape.jac[l - 1].transpose();
      a_bar.noalias() = params.weights[l].transpose() * z_bar;
      j_bar.noalias() = params.weights[l].transpose() * g_bar;
    }
  }
}

}  // namespace

double loss_param_gradient(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const SampleLossFn& loss, GradBuffers& grad, int workers) {
  const int d = params.arch.input_dim;
  if (X.rows() != d) throw std::invalid_argument("loss_param_gradient: input rows mismatch");
  const int B = static_cast<int>(X.cols());
  if (B == 0) throw std::invalid_argument("loss_param_gradient: empty batch");

  const int shards = (B + kShardSize - 1) / kShardSize;
  std::vector<GradBuffers> shard_grads(shards);
  std::vector<double> shard_loss(shards, 0.0);
  std::vector<std::string> shard_errors(shards);

  parallel_for(
      shards,
      [&](int s) {
        try {
          const int begin = s * kShardSize;
          const int count = std::min(kShardSize, B - begin);
          MlpBatchTape tape;
          mlp_forward_batch(params, X.middleCols(begin, count), tape);

          Eigen::RowVectorXd value_bar(count);
          Eigen::MatrixXd jac_bar(d, count);
          double local_loss = 0.0;
          Eigen::VectorXd dgrad(d);
          for (int i = 0; i < count; ++i) {
            const int sample = begin + i;
            if (!std::isfinite(tape.value(i)) || !tape.value_jac.col(i).allFinite())
              throw std::runtime_error("loss_param_gradient: non-finite network output at sample " +
                                       std::to_string(sample));
            double dval = 0.0;
            dgrad.setZero();
            const double li = loss(sample, tape.value(i), tape.value_jac.col(i), dval, dgrad);
            if (!std::isfinite(li) || !std::isfinite(dval) || !dgrad.allFinite())
              throw std::runtime_error("loss_param_gradient: non-finite loss at sample " +
                                       std::to_string(sample));
            local_loss += li;
            value_bar(i) = dval;
            jac_bar.col(i) = dgrad;
          }
          shard_grads[s].init_like(params);
          mlp_backward_shard(params, tape, value_bar, jac_bar, shard_grads[s]);
          shard_loss[s] = local_loss;
        } catch (const std::exception& e) {
          shard_errors[s] = e.what();
        }
      },
      workers);

  for (int s = 0; s < shards; ++s)
    if (!shard_errors[s].empty()) throw std::runtime_error(shard_errors[s]);

  grad.init_like(params);
  double total = 0.0;
  for (int s = 0; s < shards; ++s) {  // fixed reduction order
    grad.axpy(1.0, shard_grads[s]);
    total += shard_loss[s];
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  for (auto& w : grad.weights) w *= inv_b;
  for (auto& b : grad.biases) b *= inv_b;
  return total * inv_b;
}

}  // namespace hjnav
