#include "hjnav/safety.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjnav {

namespace {
double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

Eigen::Vector4d relative_derivative(const RelativeState& rs, const ControlInput& u_i,
                                    const ControlInput& u_j) {
  return Eigen::Vector4d(rs.dvx, rs.dvy, u_i.ax - u_j.ax, u_i.ay - u_j.ay);
}

double psi(const RelativeState& rs, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("psi: r must be positive");
  return std::sqrt(rs.dx * rs.dx + rs.dy * rs.dy) - r;
}

SafetyHamiltonianMax safety_hamiltonian_max(const Eigen::Vector4d& grad, const RelativeState& rs,
                                            double a_max) {
  if (!grad.allFinite())
    throw std::invalid_argument("safety_hamiltonian_max: non-finite gradient");
  SafetyHamiltonianMax out;
  out.u_i = ControlInput{a_max * sign_of(grad[2]), a_max * sign_of(grad[3])};
  out.u_j = ControlInput{-a_max * sign_of(grad[2]), -a_max * sign_of(grad[3])};
  out.f_star = relative_derivative(rs, out.u_i, out.u_j);
  out.value = grad.dot(out.f_star);
  return out;
}

SafetyReachProblem::SafetyReachProblem(SafetyProblemParams params) : params_(params) {
  scaler_.offset = Eigen::VectorXd::Zero(5);
  scaler_.scale.resize(5);
  scaler_.scale << params_.horizon, params_.rel_pos_bound, params_.rel_pos_bound,
      params_.rel_vel_bound, params_.rel_vel_bound;
}

void SafetyReachProblem::sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const {
  q[1] = rng.uniform(-params_.rel_pos_bound, params_.rel_pos_bound);
  q[2] = rng.uniform(-params_.rel_pos_bound, params_.rel_pos_bound);
  q[3] = rng.uniform(-params_.rel_vel_bound, params_.rel_vel_bound);
  q[4] = rng.uniform(-params_.rel_vel_bound, params_.rel_vel_bound);
}

double SafetyReachProblem::residual_loss(const Eigen::VectorXd& q, double r_value,
                                         const Eigen::Ref<const Eigen::VectorXd>& r_grad_norm,
                                         double* d_value, Eigen::VectorXd* d_grad_norm) const {
  const double t = q[0];
  const double tau = params_.horizon - t;
  const RelativeState rs{q[1], q[2], q[3], q[4]};

  const double dist = std::sqrt(rs.dx * rs.dx + rs.dy * rs.dy);
  const double psi_value = dist - params_.collision_radius;
  Eigen::Vector4d psi_grad = Eigen::Vector4d::Zero();
  if (dist > 1e-12) {
    psi_grad[0] = rs.dx / dist;
    psi_grad[1] = rs.dy / dist;
  }

  // Physical V_s gradient over the relative state.
  Eigen::Vector4d grad_state;
  for (int i = 0; i < 4; ++i)
    grad_state[i] = psi_grad[i] + tau * r_grad_norm[i + 1] * scaler_.jacobian_entry(i + 1, q[i + 1]);

  const SafetyHamiltonianMax h = safety_hamiltonian_max(grad_state, rs, params_.accel_bound);

  const double jac_t = scaler_.jacobian_entry(0, t);
  const double dt_v = -r_value + tau * r_grad_norm[0] * jac_t;  // dV/dt
  const double value = psi_value + tau * r_value;

  const double branch_pde = dt_v + h.value;
  const double branch_target = psi_value - value;  // = -tau * r_value
  const bool pde_active = branch_pde <= branch_target;  // tie -> PDE branch
  const double residual = pde_active ? branch_pde : branch_target;
  const double loss = std::abs(residual);

  if (d_value) {
    const double s = sign_of(residual);
    d_grad_norm->setZero();
    if (pde_active) {
      *d_value = -s;
      (*d_grad_norm)[0] = s * tau * jac_t;
      for (int i = 0; i < 4; ++i)
        (*d_grad_norm)[i + 1] = s * tau * scaler_.jacobian_entry(i + 1, q[i + 1]) * h.f_star[i];
    } else {
      *d_value = -s * tau;
    }
  }
  return loss;
}

ExactBcNet SafetyReachProblem::make_net(NetParams net_params) const {
  const double r = params_.collision_radius;
  return ExactBcNet(std::move(net_params), scaler_, params_.horizon,
                    [r](const Eigen::VectorXd& q, Eigen::VectorXd* grad) {
                      const double dist = std::sqrt(q[1] * q[1] + q[2] * q[2]);
                      if (grad) {
                        grad->setZero();
                        if (dist > 1e-12) {
                          (*grad)[1] = q[1] / dist;
                          (*grad)[2] = q[2] / dist;
                        }
                      }
                      return dist - r;
                    });
}

RelativeState SafetyReachProblem::clamp_to_box(const RelativeState& rs) const {
  auto clamp = [](double v, double b) { return std::clamp(v, -b, b); };
  return RelativeState{clamp(rs.dx, params_.rel_pos_bound), clamp(rs.dy, params_.rel_pos_bound),
                       clamp(rs.dvx, params_.rel_vel_bound), clamp(rs.dvy, params_.rel_vel_bound)};
}

Eigen::VectorXd safety_sample(double t, const RelativeState& rs) {
  Eigen::VectorXd q(5);
  q << t, rs.dx, rs.dy, rs.dvx, rs.dvy;
  return q;
}

EvalResult safety_value_eval(const ExactBcNet& net, double t, const RelativeState& rs) {
  return net.evaluate(safety_sample(t, rs));
}

double vi_residual_loss(const SafetyReachProblem& problem, const NetParams& params,
                        const CollocationBatch& batch, int workers) {
  return residual_loss_mean(problem, params, batch, workers);
}

double pair_risk(const ExactBcNet& net, const SafetyReachProblem& problem, const AgentState& ego,
                 const AgentState& other, double t) {
  const RelativeState rel{other.px - ego.px, other.py - ego.py, other.vx - ego.vx,
                          other.vy - ego.vy};
  return net.value(safety_sample(t, problem.clamp_to_box(rel)));
}

}  // namespace hjnav
