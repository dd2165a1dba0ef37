#include "ecim/walker_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecim {

Observation observe(const WalkerConfig& cfg, const WalkerState& state) {
  Observation obs{};
  int k = 0;
  for (int j = 0; j < kNumJoints; ++j) obs[k++] = state.q[j];
  for (int j = 0; j < kNumJoints; ++j) obs[k++] = state.qdot[j];
  obs[k++] = state.theta;
  obs[k++] = state.omega[1];
  obs[k++] = state.v;
  obs[k++] = cfg.v_cmd;
  const double base_h = terrain_height(cfg.terrain, state.x);
  for (double d : kLookahead) obs[k++] = terrain_height(cfg.terrain, state.x + d) - base_h;
  return obs;
}

WalkerState env_reset(const WalkerConfig& cfg, std::uint64_t seed) {
  WalkerState state;
  state.rng = Rng(seed);
  state.theta = std::atan(terrain_slope_at(cfg.terrain, 0.0));
  return state;
}

StepResult env_step(const WalkerConfig& cfg, WalkerState& state,
                    std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(kNumJoints)) {
    throw std::invalid_argument("env_step: action dimension mismatch");
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw std::invalid_argument("env_step: non-finite action");
  }

  const double dt = cfg.dt;
  StepResult result;
  StepInfo& info = result.info;

  // Joint dynamics: damped springs driven by the commanded torque,
  // semi-implicit Euler. Position clamp zeroes the velocity on contact.
  std::array<double, kNumJoints> u{}, qddot{}, qdot_new{}, q_new{};
  for (int j = 0; j < kNumJoints; ++j) {
    u[j] = cfg.u_max * std::clamp(action[j], -1.0, 1.0);
    qddot[j] = u[j] - cfg.damping * state.qdot[j] - cfg.stiffness * state.q[j];
    qdot_new[j] = state.qdot[j] + dt * qddot[j];
    q_new[j] = state.q[j] + dt * qdot_new[j];
    if (q_new[j] > cfg.q_max) {
      q_new[j] = cfg.q_max;
      qdot_new[j] = 0.0;
    } else if (q_new[j] < -cfg.q_max) {
      q_new[j] = -cfg.q_max;
      qdot_new[j] = 0.0;
    }
  }

  // Gait drive: forward speed comes from the trot-weighted mean joint
  // velocity, rectified, scaled by ground traction at the new position.
  double gait = 0.0;
  for (int j = 0; j < kNumJoints; ++j) gait += kGaitWeights[j] * qdot_new[j];
  gait /= kNumJoints;
  const double v_raw = cfg.v_scale * std::max(0.0, gait);
  const double traction = terrain_traction(cfg.terrain, state.x);
  const double v_new = v_raw * traction;
  const double x_new = state.x + dt * v_new;

  // Pitch relaxes toward the local grade, kicked by trot-weighted joint
  // accelerations; roll rate couples to the left/right velocity split.
  double wq = 0.0;
  for (int j = 0; j < kNumJoints; ++j) wq += kGaitWeights[j] * qddot[j];
  const double theta_target = std::atan(terrain_slope_at(cfg.terrain, x_new));
  const double theta_new = (1.0 - cfg.alpha_theta) * state.theta +
                           cfg.alpha_theta * theta_target +
                           cfg.kappa_pitch * dt * wq / kNumJoints;
  const double omega_y = (theta_new - state.theta) / dt;
  const double omega_x =
      cfg.kappa_roll * (qdot_new[0] + qdot_new[2] - qdot_new[1] - qdot_new[3]);

  const double h_old = terrain_height(cfg.terrain, state.x);
  const double h_new = terrain_height(cfg.terrain, x_new);
  const double a_fwd = (v_new - state.v) / dt;
  const double a_vert = std::clamp((h_new - h_old) / (dt * dt), -50.0, 50.0);

  double torque_sq = 0.0, accel_sq = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    torque_sq += u[j] * u[j];
    accel_sq += qddot[j] * qddot[j];
  }
  info.r_velocity = cfg.w_velocity * std::min(v_new, cfg.v_cmd);
  info.r_omega = cfg.w_omega * (omega_x * omega_x + omega_y * omega_y);
  info.r_torque = cfg.w_torque * torque_sq;
  info.r_accel = cfg.w_accel * accel_sq * 1e-3;
  result.reward = info.r_velocity - info.r_omega - info.r_torque - info.r_accel;

  state.x = x_new;
  state.v = v_new;
  state.q = q_new;
  state.qdot = qdot_new;
  state.qddot_prev = qddot;
  state.theta = theta_new;
  state.omega = {omega_x, omega_y, 0.0};
  state.a_body = {a_fwd, a_vert};
  state.t += 1;

  info.torque = u;
  info.joint_accel = qddot;
  info.omega_x = omega_x;
  info.omega_y = omega_y;
  info.theta = theta_new;
  info.a_body = state.a_body;
  info.fell = std::abs(theta_new) > cfg.fall_angle;
  result.done = info.fell || state.t >= cfg.horizon;
  result.obs = observe(cfg, state);
  return result;
}

VecEnv::VecEnv(const WalkerConfig& cfg, std::vector<std::uint64_t> seeds)
    : cfg_(cfg), seeds_(std::move(seeds)) {
  if (seeds_.empty()) throw std::invalid_argument("VecEnv: need at least one seed");
  reset_all();
}

VecEnv::VecEnv(const WalkerConfig& cfg, int n, std::uint64_t base_seed)
    : VecEnv(cfg, [&] {
        if (n < 1) throw std::invalid_argument("VecEnv: need at least one instance");
        std::vector<std::uint64_t> seeds(n);
        for (int i = 0; i < n; ++i) seeds[i] = base_seed + static_cast<std::uint64_t>(i);
        return seeds;
      }()) {}

void VecEnv::reset_all() {
  const int n = static_cast<int>(seeds_.size());
  states_.clear();
  observations_.clear();
  for (int i = 0; i < n; ++i) {
    states_.push_back(env_reset(cfg_, seeds_[i]));
    observations_.push_back(observe(cfg_, states_[i]));
  }
  returns_.assign(n, 0.0);
  lengths_.assign(n, 0);
}

void VecEnv::step(std::span<const double> actions, std::vector<StepResult>& results,
                  std::vector<EpisodeStats>& completed) {
  const int n = size();
  if (actions.size() != static_cast<std::size_t>(n) * kNumJoints) {
    throw std::invalid_argument("VecEnv::step: action block size mismatch");
  }
  results.resize(n);
  for (int i = 0; i < n; ++i) {
    results[i] = env_step(cfg_, states_[i], actions.subspan(
                              static_cast<std::size_t>(i) * kNumJoints, kNumJoints));
    returns_[i] += results[i].reward;
    lengths_[i] += 1;
    // results[i].obs stays the true successor observation; observations_[i]
    // is what the next action should be conditioned on (reset obs if done).
    if (results[i].done) {
      completed.push_back({i, returns_[i], lengths_[i], results[i].info.fell});
      states_[i] = env_reset(cfg_, seeds_[i]);
      observations_[i] = observe(cfg_, states_[i]);
      returns_[i] = 0.0;
      lengths_[i] = 0;
    } else {
      observations_[i] = results[i].obs;
    }
  }
}

}  // namespace ecim
