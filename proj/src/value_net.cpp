#include "hjnav/value_net.hpp"

#include <stdexcept>
#include <utility>

namespace hjnav {

ExactBcNet::ExactBcNet(NetParams params, InputScaler scaler, double horizon, TerminalFn terminal)
    : params_(std::move(params)),
      scaler_(std::move(scaler)),
      horizon_(horizon),
      terminal_(std::move(terminal)) {
  if (scaler_.offset.size() != params_.arch.input_dim ||
      scaler_.scale.size() != params_.arch.input_dim)
    throw std::invalid_argument("ExactBcNet: scaler size mismatch");
  if (!(horizon_ > 0.0)) throw std::invalid_argument("ExactBcNet: horizon must be positive");
}

void ExactBcNet::set_params(NetParams p) {
  if (!(p.arch == params_.arch)) throw std::invalid_argument("ExactBcNet: arch mismatch");
  params_ = std::move(p);
}

void ExactBcNet::check_time(double t) const {
  if (!(t >= 0.0 && t <= horizon_))
    throw std::invalid_argument("ExactBcNet: time outside [0, horizon]");
}

double ExactBcNet::value(const Eigen::VectorXd& q) const {
  check_time(q[0]);
  const double tau = horizon_ - q[0];
  return terminal_(q, nullptr) + tau * mlp_forward(params_, scaler_.normalize(q));
}

EvalResult ExactBcNet::residual(const Eigen::VectorXd& q) const {
  return mlp_forward_with_input_grad(params_, scaler_.normalize(q));
}

EvalResult ExactBcNet::evaluate(const Eigen::VectorXd& q) const {
  check_time(q[0]);
  const double tau = horizon_ - q[0];
  const EvalResult r = residual(q);

  Eigen::VectorXd terminal_grad = Eigen::VectorXd::Zero(q.size());
  const double m = terminal_(q, &terminal_grad);

  EvalResult out;
  out.value = m + tau * r.value;
  out.input_gradient.resize(q.size());
  out.input_gradient[0] = terminal_grad[0] - r.value +
                          tau * r.input_gradient[0] * scaler_.jacobian_entry(0, q[0]);
  for (int i = 1; i < q.size(); ++i) {
    out.input_gradient[i] =
        terminal_grad[i] + tau * r.input_gradient[i] * scaler_.jacobian_entry(i, q[i]);
  }
  return out;
}

}  // namespace hjnav
