#pragma once

#include <Eigen/Core>

#include "hjnav/training.hpp"
#include "hjnav/types.hpp"
#include "hjnav/value_net.hpp"

namespace hjnav {

/// Relative state of an agent pair: positions and velocities of one agent
/// expressed relative to the other.
struct RelativeState {
  double dx = 0.0;
  double dy = 0.0;
  double dvx = 0.0;
  double dvy = 0.0;
};

/// Pairwise relative dynamics: [dvx, dvy, u_i - u_j] per axis, where the
/// relative state is agent i minus agent j.
Eigen::Vector4d relative_derivative(const RelativeState& rs, const ControlInput& u_i,
                                    const ControlInput& u_j);

/// Safety target: signed separation margin, ||dp|| - r.
double psi(const RelativeState& rs, double r);

/// Joint cooperative maximization of <grad, f_s> over both agents' control
/// boxes; per axis both agents push the relative acceleration to
/// 2*a_max*sign(velocity gradient), zero on ties.
struct SafetyHamiltonianMax {
  double value = 0.0;
  ControlInput u_i;
  ControlInput u_j;
  Eigen::Vector4d f_star = Eigen::Vector4d::Zero();
};
SafetyHamiltonianMax safety_hamiltonian_max(const Eigen::Vector4d& grad, const RelativeState& rs,
                                            double a_max);

/// Training/evaluation box for the pairwise safety value function:
/// relative positions up to 2x the observation radius, relative velocities
/// up to 2x the per-agent bound (everything a ranking query can see).
struct SafetyProblemParams {
  double rel_pos_bound = 1.0;
  double rel_vel_bound = 8.0;
  double accel_bound = 4.0;
  double collision_radius = 0.1;
  double horizon = 0.2;

  static SafetyProblemParams from_task(const ArenaLimits& limits, const TaskParams& task) {
    SafetyProblemParams p;
    p.rel_pos_bound = 2.0 * task.observation_radius;
    p.rel_vel_bound = 2.0 * limits.vel_bound;
    p.accel_bound = limits.accel_bound;
    p.collision_radius = task.collision_radius;
    p.horizon = task.horizon;
    return p;
  }
};

/// HJB variational-inequality residual problem for the pairwise safety
/// value function V_s. Samples are [t, dx, dy, dvx, dvy].
class SafetyReachProblem final : public ResidualProblem {
 public:
  explicit SafetyReachProblem(SafetyProblemParams params);

  int input_dim() const override { return 5; }
  double horizon() const override { return params_.horizon; }
  const InputScaler& scaler() const override { return scaler_; }
  void sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const override;
  double residual_loss(const Eigen::VectorXd& q, double r_value,
                       const Eigen::Ref<const Eigen::VectorXd>& r_grad_norm, double* d_value,
                       Eigen::VectorXd* d_grad_norm) const override;

  const SafetyProblemParams& params() const { return params_; }

  /// Exact-terminal wrapper: V_s(T, x) = psi(x) for any parameters.
  ExactBcNet make_net(NetParams net_params) const;

  /// Clamps a physical relative state into the trained box.
  RelativeState clamp_to_box(const RelativeState& rs) const;

 private:
  SafetyProblemParams params_;
  InputScaler scaler_;
};

/// Spec-level convenience wrappers.
EvalResult safety_value_eval(const ExactBcNet& net, double t, const RelativeState& rs);

/// Mean |VI residual| of a batch (value-only path).
double vi_residual_loss(const SafetyReachProblem& problem, const NetParams& params,
                        const CollocationBatch& batch, int workers = 0);

/// Collision risk of the pair (ego, other): V_s on the relative state
/// other - ego, clamped into the trained box. Smaller = more dangerous.
double pair_risk(const ExactBcNet& net, const SafetyReachProblem& problem,
                 const AgentState& ego, const AgentState& other, double t);

Eigen::VectorXd safety_sample(double t, const RelativeState& rs);

}  // namespace hjnav
