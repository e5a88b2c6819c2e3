#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "hjnav/dynamics.hpp"
#include "hjnav/training.hpp"
#include "hjnav/types.hpp"
#include "hjnav/value_net.hpp"

namespace hjnav {

/// Result of the analytic Hamiltonian minimization for the augmented
/// navigation system: the control-affine structure yields per-axis bang-bang
/// controls, u* = -a_max * sign(dV/dv), zero on ties.
struct HamiltonianMin {
  double value = 0.0;                  // min_u <grad, f_hat(aug, u)>
  std::vector<ControlInput> controls;  // per slot; virtual slots get zero
  Eigen::VectorXd f_star;              // dynamics at u*, aligned with [z, slots...]
};

/// grad_state is the value gradient over [z, slot coords...] (length
/// 1 + 6*(n+1)), matching EvalResult::input_gradient without its t entry.
HamiltonianMin hamiltonian_min(const Eigen::Ref<const Eigen::VectorXd>& grad_state,
                               const AugmentedObservation& aug, const ArenaLimits& limits);

/// Flat physical sample for the navigation problem:
/// [t, z, slot0(px,py,vx,vy,gx,gy), slot1..., slotn...].
Eigen::VectorXd nav_sample_from_observation(double t, const AugmentedObservation& aug);

/// Inverse of nav_sample_from_observation. Slots whose position lies
/// outside 2x the arena are reconstructed as virtual (padding slots live at
/// 10x the arena half-width by construction).
AugmentedObservation nav_observation_from_sample(const Eigen::VectorXd& q,
                                                 const ArenaLimits& limits, int num_neighbours);

/// Epigraph SC-OCP instance: terminal max(phi - z, g), constraint g, and
/// the analytic Hamiltonian of the augmented dynamics. Samples are
/// [t, z, state...]; the z slot is always index 1.
class EpigraphInstance : public ResidualProblem {
 public:
  virtual double z_max() const = 0;
  /// Terminal condition max(phi - z, g) with its branch subgradient
  /// (cost branch on ties).
  virtual double terminal(const Eigen::VectorXd& q, Eigen::VectorXd* grad) const = 0;
  virtual double constraint(const Eigen::VectorXd& q) const = 0;
  /// Minimizing dynamics f_hat(q, u*) given the state gradient (aligned
  /// with q[1..]); the Hamiltonian value is the inner product.
  virtual void optimal_dynamics(const Eigen::VectorXd& q,
                                const Eigen::Ref<const Eigen::VectorXd>& grad_state,
                                Eigen::Ref<Eigen::VectorXd> f_star) const = 0;

  double residual_loss(const Eigen::VectorXd& q, double r_value,
                       const Eigen::Ref<const Eigen::VectorXd>& r_grad_norm, double* d_value,
                       Eigen::VectorXd* d_grad_norm) const final;

  /// Exact-boundary-condition wrapper bound to this instance.
  ExactBcNet make_net(NetParams params) const;
};

/// The decentralized drone-navigation instance: ego plus n neighbour slots,
/// goal-distance running cost, pairwise collision constraint.
class NavigationEpigraphInstance final : public EpigraphInstance {
 public:
  NavigationEpigraphInstance(ArenaLimits limits, TaskParams task, double virtual_slot_prob = 0.15);

  int input_dim() const override { return 2 + 6 * (task_.num_neighbours + 1); }
  double horizon() const override { return task_.horizon; }
  const InputScaler& scaler() const override { return scaler_; }
  double z_max() const override { return z_max_; }
  void sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const override;
  double terminal(const Eigen::VectorXd& q, Eigen::VectorXd* grad) const override;
  double constraint(const Eigen::VectorXd& q) const override;
  void optimal_dynamics(const Eigen::VectorXd& q,
                        const Eigen::Ref<const Eigen::VectorXd>& grad_state,
                        Eigen::Ref<Eigen::VectorXd> f_star) const override;

  const ArenaLimits& limits() const { return limits_; }
  const TaskParams& task() const { return task_; }

 private:
  ArenaLimits limits_;
  TaskParams task_;
  double virtual_slot_prob_;
  double z_max_;
  InputScaler scaler_;
};

/// Low-dimensional validation instance: one 1-D double integrator
/// (state x, v), goal-distance cost |x - goal|, an interval obstacle
/// g = halfwidth - |x - center|, and the budget state z. Sample layout
/// [t, z, x, v]. Small enough for the dense grid oracle.
struct Double1DParams {
  double x_bound = 1.0;
  double v_bound = 2.0;
  double accel_bound = 2.0;
  double horizon = 1.0;
  double goal_x = 0.6;
  double obstacle_center = -0.4;
  double obstacle_halfwidth = 0.15;
  double z_max = 0.0;  // 0 => (1 + horizon) * max achievable cost rate

  double resolved_z_max() const {
    if (z_max > 0.0) return z_max;
    return (1.0 + horizon) * (2.0 * x_bound);
  }
};

class Double1DEpigraphInstance final : public EpigraphInstance {
 public:
  explicit Double1DEpigraphInstance(Double1DParams params);

  int input_dim() const override { return 4; }
  double horizon() const override { return params_.horizon; }
  const InputScaler& scaler() const override { return scaler_; }
  double z_max() const override { return z_max_; }
  void sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const override;
  double terminal(const Eigen::VectorXd& q, Eigen::VectorXd* grad) const override;
  double constraint(const Eigen::VectorXd& q) const override;
  void optimal_dynamics(const Eigen::VectorXd& q,
                        const Eigen::Ref<const Eigen::VectorXd>& grad_state,
                        Eigen::Ref<Eigen::VectorXd> f_star) const override;

  const Double1DParams& params() const { return params_; }
  double running_cost(double x) const { return std::abs(x - params_.goal_x); }

 private:
  Double1DParams params_;
  double z_max_;
  InputScaler scaler_;
};

/// Spec-level convenience: evaluates the auxiliary value function
/// V_hat(t, o, z) with its physical gradient for the navigation instance.
EvalResult aux_value_eval(const ExactBcNet& net, double t, const AugmentedObservation& aug);

/// Mean |HJB residual| of a batch (the training loss, value-only path).
double pde_residual_loss(const EpigraphInstance& instance, const NetParams& params,
                         const CollocationBatch& batch, int workers = 0);

}  // namespace hjnav
