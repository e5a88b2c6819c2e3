#pragma once

#include <Eigen/Core>
#include <functional>

#include "hjnav/mlp.hpp"
#include "hjnav/scaling.hpp"

namespace hjnav {

/// Terminal-condition function: value at the physical sample q plus, when
/// grad is non-null, its subgradient over q (entry 0 is the t slot and must
/// be zero). The subgradient uses the active branch; ties resolve to the
/// cost branch so evaluation is deterministic.
using TerminalFn = std::function<double(const Eigen::VectorXd& q, Eigen::VectorXd* grad)>;

/// Value network with the terminal condition enforced exactly:
///   value(q) = terminal(q) + (T - q[0]) * R(normalize(q)),
/// so value(q) equals the terminal function at q[0] == T for any
/// parameters. Physical samples q always carry time in slot 0.
class ExactBcNet {
 public:
  ExactBcNet() = default;
  ExactBcNet(NetParams params, InputScaler scaler, double horizon, TerminalFn terminal);

  double horizon() const { return horizon_; }
  const NetParams& params() const { return params_; }
  void set_params(NetParams p);
  const InputScaler& scaler() const { return scaler_; }
  const TerminalFn& terminal() const { return terminal_; }
  int input_dim() const { return params_.arch.input_dim; }

  /// Value-only fast path. Throws std::invalid_argument when q[0] is
  /// outside [0, T].
  double value(const Eigen::VectorXd& q) const;

  /// Value plus exact gradient in physical input units. Gradient slot 0 is
  /// the total time derivative -R + (T-t) dR/dt.
  EvalResult evaluate(const Eigen::VectorXd& q) const;

  /// Residual network R in network coordinates, with input gradient.
  EvalResult residual(const Eigen::VectorXd& q) const;

 private:
  void check_time(double t) const;

  NetParams params_;
  InputScaler scaler_;
  double horizon_ = 0.0;
  TerminalFn terminal_;
};

}  // namespace hjnav
