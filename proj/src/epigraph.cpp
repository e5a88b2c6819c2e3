#include "hjnav/epigraph.hpp"

#include <cmath>
#include <stdexcept>

namespace hjnav {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Subgradient of the goal-distance sum over real slots, written into the
// position and goal entries of grad (layout [t, z, slots...]).
void accumulate_phi_gradient(const Observation& obs, Eigen::VectorXd& grad) {
  for (int i = 0; i < obs.slot_count(); ++i) {
    const ObsSlot& s = obs.slot(i);
    if (s.is_virtual) continue;
    const double dx = s.state.px - s.goal.gx;
    const double dy = s.state.py - s.goal.gy;
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist < 1e-12) continue;  // kink at the goal: zero subgradient
    const int base = 2 + 6 * i;
    grad[base + 0] += dx / dist;
    grad[base + 1] += dy / dist;
    grad[base + 4] -= dx / dist;
    grad[base + 5] -= dy / dist;
  }
}

// Subgradient of g = r - min pairwise distance: gradient of the first
// minimal pair in scan order.
void accumulate_g_gradient(const Observation& obs, Eigen::VectorXd& grad) {
  const int n = obs.slot_count();
  double best = std::numeric_limits<double>::infinity();
  int bi = -1, bj = -1;
  for (int i = 0; i < n; ++i) {
    if (obs.slot(i).is_virtual) continue;
    for (int j = i + 1; j < n; ++j) {
      if (obs.slot(j).is_virtual) continue;
      const double d = agent_distance(obs.slot(i).state, obs.slot(j).state);
      if (d < best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  if (bi < 0 || best < 1e-12) return;  // sentinel case or coincident pair
  const double dx = obs.slot(bi).state.px - obs.slot(bj).state.px;
  const double dy = obs.slot(bi).state.py - obs.slot(bj).state.py;
  const int a = 2 + 6 * bi;
  const int b = 2 + 6 * bj;
  grad[a + 0] -= dx / best;
  grad[a + 1] -= dy / best;
  grad[b + 0] += dx / best;
  grad[b + 1] += dy / best;
}

}  // namespace

HamiltonianMin hamiltonian_min(const Eigen::Ref<const Eigen::VectorXd>& grad_state,
                               const AugmentedObservation& aug, const ArenaLimits& limits) {
  const int slots = aug.obs.slot_count();
  if (grad_state.size() != 1 + 6 * slots)
    throw std::invalid_argument("hamiltonian_min: gradient length mismatch");
  if (!grad_state.allFinite())
    throw std::invalid_argument("hamiltonian_min: non-finite gradient");

  HamiltonianMin out;
  out.controls.assign(slots, ControlInput{});
  out.f_star = Eigen::VectorXd::Zero(grad_state.size());
  out.f_star[0] = -running_cost_l(aug.obs);

  const double a_max = limits.accel_bound;
  for (int i = 0; i < slots; ++i) {
    const ObsSlot& s = aug.obs.slot(i);
    if (s.is_virtual) continue;
    const int base = 1 + 6 * i;
    const double gvx = grad_state[base + 2];
    const double gvy = grad_state[base + 3];
    out.controls[i] = ControlInput{-a_max * sign_of(gvx), -a_max * sign_of(gvy)};
    out.f_star[base + 0] = s.state.vx;
    out.f_star[base + 1] = s.state.vy;
    out.f_star[base + 2] = out.controls[i].ax;
    out.f_star[base + 3] = out.controls[i].ay;
  }
  out.value = grad_state.dot(out.f_star);
  return out;
}

Eigen::VectorXd nav_sample_from_observation(double t, const AugmentedObservation& aug) {
  const int slots = aug.obs.slot_count();
  Eigen::VectorXd q(2 + 6 * slots);
  q[0] = t;
  q[1] = aug.z;
  for (int i = 0; i < slots; ++i) {
    const ObsSlot& s = aug.obs.slot(i);
    const int base = 2 + 6 * i;
    q[base + 0] = s.state.px;
    q[base + 1] = s.state.py;
    q[base + 2] = s.state.vx;
    q[base + 3] = s.state.vy;
    q[base + 4] = s.goal.gx;
    q[base + 5] = s.goal.gy;
  }
  return q;
}

AugmentedObservation nav_observation_from_sample(const Eigen::VectorXd& q,
                                                 const ArenaLimits& limits,
                                                 int num_neighbours) {
  const int slots = num_neighbours + 1;
  if (q.size() != 2 + 6 * slots)
    throw std::invalid_argument("nav_observation_from_sample: length mismatch");
  AugmentedObservation aug;
  aug.z = q[1];
  const double virtual_threshold = 2.0 * limits.pos_bound;
  for (int i = 0; i < slots; ++i) {
    const int base = 2 + 6 * i;
    ObsSlot slot;
    slot.state = AgentState{q[base + 0], q[base + 1], q[base + 2], q[base + 3]};
    slot.goal = GoalSpec{q[base + 4], q[base + 5]};
    slot.is_virtual = std::abs(slot.state.px) > virtual_threshold ||
                      std::abs(slot.state.py) > virtual_threshold;
    if (i == 0)
      aug.obs.ego = slot;
    else
      aug.obs.neighbours.push_back(slot);
  }
  return aug;
}

double EpigraphInstance::residual_loss(const Eigen::VectorXd& q, double r_value,
                                       const Eigen::Ref<const Eigen::VectorXd>& r_grad_norm,
                                       double* d_value, Eigen::VectorXd* d_grad_norm) const {
  const double t = q[0];
  const double tau = horizon() - t;
  const InputScaler& sc = scaler();
  const int d = input_dim();

  const bool need_grad = d_value != nullptr;
  Eigen::VectorXd terminal_grad = Eigen::VectorXd::Zero(d);
  const double m = terminal(q, &terminal_grad);

  // Physical state gradient of V_hat over [z, state...] = q[1..].
  Eigen::VectorXd grad_state(d - 1);
  for (int i = 1; i < d; ++i)
    grad_state[i - 1] = terminal_grad[i] + tau * r_grad_norm[i] * sc.jacobian_entry(i, q[i]);

  Eigen::VectorXd f_star(d - 1);
  optimal_dynamics(q, grad_state, f_star);
  const double hamiltonian_value = grad_state.dot(f_star);

  const double jac_t = sc.jacobian_entry(0, t);
  const double minus_dt_v = r_value - tau * r_grad_norm[0] * jac_t;  // -dV/dt
  const double value = m + tau * r_value;

  const double branch_pde = minus_dt_v - hamiltonian_value;
  const double branch_obstacle = value - constraint(q);
  const bool pde_active = branch_pde <= branch_obstacle;  // tie -> PDE branch
  const double residual = pde_active ? branch_pde : branch_obstacle;
  const double loss = std::abs(residual);

  if (need_grad) {
    const double s = sign_of(residual);
    d_grad_norm->setZero();
    if (pde_active) {
      *d_value = s;
      (*d_grad_norm)[0] = -s * tau * jac_t;
      for (int i = 1; i < d; ++i)
        (*d_grad_norm)[i] = -s * tau * sc.jacobian_entry(i, q[i]) * f_star[i - 1];
    } else {
      *d_value = s * tau;
    }
  }
  return loss;
}

ExactBcNet EpigraphInstance::make_net(NetParams params) const {
  return ExactBcNet(std::move(params), scaler(), horizon(),
                    [this](const Eigen::VectorXd& q, Eigen::VectorXd* grad) {
                      if (grad) {
                        grad->setZero();
                        return terminal(q, grad);
                      }
                      return terminal(q, nullptr);
                    });
}

NavigationEpigraphInstance::NavigationEpigraphInstance(ArenaLimits limits, TaskParams task,
                                                       double virtual_slot_prob)
    : limits_(limits), task_(task), virtual_slot_prob_(virtual_slot_prob) {
  z_max_ = task_.resolved_z_max(limits_);
  const int d = input_dim();
  scaler_.offset = Eigen::VectorXd::Zero(d);
  scaler_.scale.resize(d);
  scaler_.scale[0] = task_.horizon;
  scaler_.scale[1] = z_max_;
  for (int i = 0; i <= task_.num_neighbours; ++i) {
    const int base = 2 + 6 * i;
    scaler_.scale[base + 0] = limits_.pos_bound;
    scaler_.scale[base + 1] = limits_.pos_bound;
    scaler_.scale[base + 2] = limits_.vel_bound;
    scaler_.scale[base + 3] = limits_.vel_bound;
    scaler_.scale[base + 4] = limits_.pos_bound;
    scaler_.scale[base + 5] = limits_.pos_bound;
  }
}

void NavigationEpigraphInstance::sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const {
  q[1] = rng.uniform(0.0, z_max_);
  const double far = limits_.far_coordinate();
  for (int i = 0; i <= task_.num_neighbours; ++i) {
    const int base = 2 + 6 * i;
    // Neighbour slots are virtual with a small probability so deployment
    // observations with padding stay in-distribution.
    const bool make_virtual = i > 0 && rng.uniform() < virtual_slot_prob_;
    if (make_virtual) {
      q[base + 0] = far;
      q[base + 1] = far;
      q[base + 2] = 0.0;
      q[base + 3] = 0.0;
      q[base + 4] = far;
      q[base + 5] = far;
    } else {
      q[base + 0] = rng.uniform(-limits_.pos_bound, limits_.pos_bound);
      q[base + 1] = rng.uniform(-limits_.pos_bound, limits_.pos_bound);
      q[base + 2] = rng.uniform(-limits_.vel_bound, limits_.vel_bound);
      q[base + 3] = rng.uniform(-limits_.vel_bound, limits_.vel_bound);
      q[base + 4] = rng.uniform(-limits_.pos_bound, limits_.pos_bound);
      q[base + 5] = rng.uniform(-limits_.pos_bound, limits_.pos_bound);
    }
  }
}

double NavigationEpigraphInstance::terminal(const Eigen::VectorXd& q,
                                            Eigen::VectorXd* grad) const {
  const AugmentedObservation aug =
      nav_observation_from_sample(q, limits_, task_.num_neighbours);
  const double phi = terminal_cost_phi(aug.obs);
  const double g = constraint_g(aug.obs, task_.collision_radius);
  const double cost_branch = phi - aug.z;
  if (grad) {
    grad->setZero();
    if (cost_branch >= g) {
      (*grad)[1] = -1.0;
      accumulate_phi_gradient(aug.obs, *grad);
    } else {
      accumulate_g_gradient(aug.obs, *grad);
    }
  }
  return std::max(cost_branch, g);
}

double NavigationEpigraphInstance::constraint(const Eigen::VectorXd& q) const {
  const AugmentedObservation aug =
      nav_observation_from_sample(q, limits_, task_.num_neighbours);
  return constraint_g(aug.obs, task_.collision_radius);
}

void NavigationEpigraphInstance::optimal_dynamics(
    const Eigen::VectorXd& q, const Eigen::Ref<const Eigen::VectorXd>& grad_state,
    Eigen::Ref<Eigen::VectorXd> f_star) const {
  const AugmentedObservation aug =
      nav_observation_from_sample(q, limits_, task_.num_neighbours);
  const HamiltonianMin h = hamiltonian_min(grad_state, aug, limits_);
  f_star = h.f_star;
}

Double1DEpigraphInstance::Double1DEpigraphInstance(Double1DParams params) : params_(params) {
  z_max_ = params_.resolved_z_max();
  scaler_.offset = Eigen::VectorXd::Zero(4);
  scaler_.scale.resize(4);
  scaler_.scale << params_.horizon, z_max_, params_.x_bound, params_.v_bound;
}

void Double1DEpigraphInstance::sample_state(Rng& rng, Eigen::Ref<Eigen::VectorXd> q) const {
  q[1] = rng.uniform(0.0, z_max_);
  q[2] = rng.uniform(-params_.x_bound, params_.x_bound);
  q[3] = rng.uniform(-params_.v_bound, params_.v_bound);
}

double Double1DEpigraphInstance::terminal(const Eigen::VectorXd& q,
                                          Eigen::VectorXd* grad) const {
  const double x = q[2];
  const double phi = std::abs(x - params_.goal_x);
  const double g = params_.obstacle_halfwidth - std::abs(x - params_.obstacle_center);
  const double cost_branch = phi - q[1];
  if (grad) {
    grad->setZero();
    if (cost_branch >= g) {
      (*grad)[1] = -1.0;
      (*grad)[2] = sign_of(x - params_.goal_x);
    } else {
      (*grad)[2] = -sign_of(x - params_.obstacle_center);
    }
  }
  return std::max(cost_branch, g);
}

double Double1DEpigraphInstance::constraint(const Eigen::VectorXd& q) const {
  return params_.obstacle_halfwidth - std::abs(q[2] - params_.obstacle_center);
}

void Double1DEpigraphInstance::optimal_dynamics(
    const Eigen::VectorXd& q, const Eigen::Ref<const Eigen::VectorXd>& grad_state,
    Eigen::Ref<Eigen::VectorXd> f_star) const {
  // grad_state = [dV/dz, dV/dx, dV/dv]; dynamics [zdot, xdot, vdot].
  f_star[0] = -running_cost(q[2]);
  f_star[1] = q[3];
  f_star[2] = -params_.accel_bound * sign_of(grad_state[2]);
}

EvalResult aux_value_eval(const ExactBcNet& net, double t, const AugmentedObservation& aug) {
  return net.evaluate(nav_sample_from_observation(t, aug));
}

double pde_residual_loss(const EpigraphInstance& instance, const NetParams& params,
                         const CollocationBatch& batch, int workers) {
  return residual_loss_mean(instance, params, batch, workers);
}

}  // namespace hjnav
