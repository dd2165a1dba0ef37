#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ecim/rng.hpp"
#include "ecim/terrain.hpp"

namespace ecim {

inline constexpr int kNumJoints = 4;
// Trot pattern: forward progress requires anti-phase joint velocities.
inline constexpr std::array<double, kNumJoints> kGaitWeights = {1.0, -1.0, 1.0, -1.0};
// q (J) + qdot (J) + theta + omega_y + v + v_cmd + 5 lookahead heights
inline constexpr int kObsDim = 2 * kNumJoints + 4 + 5;
inline constexpr std::array<double, 5> kLookahead = {0.1, 0.2, 0.4, 0.8, 1.6};

// Dynamics and reward parameters of the planar walker proxy.
struct WalkerConfig {
  TerrainConfig terrain;
  double dt = 0.02;        // s
  int horizon = 400;       // steps per episode
  double u_max = 10.0;     // torque scale; actions in [-1,1] map to [-u_max, u_max]
  double damping = 1.5;    // c_d
  double stiffness = 2.0;  // k_s
  double v_scale = 0.8;    // gait-drive gain
  double q_max = 1.5;      // joint position clamp (rad)
  double alpha_theta = 0.1;
  double kappa_pitch = 0.02;
  double kappa_roll = 0.05;
  double w_velocity = 1.0;
  double w_omega = 0.5;
  double w_torque = 0.005;
  double w_accel = 0.01;
  double v_cmd = 1.0;      // m/s
  double fall_angle = 1.0; // rad, |theta| beyond this ends the episode
};

struct WalkerState {
  double x = 0.0;
  double v = 0.0;
  std::array<double, kNumJoints> q{};
  std::array<double, kNumJoints> qdot{};
  std::array<double, kNumJoints> qddot_prev{};
  double theta = 0.0;
  std::array<double, 3> omega{};  // (roll rate, pitch rate, yaw rate == 0)
  std::array<double, 2> a_body{};
  int t = 0;
  Rng rng{0};
};

using Observation = std::array<double, kObsDim>;

// Per-step signals retained for the evaluation metrics.
struct StepInfo {
  std::array<double, kNumJoints> torque{};
  std::array<double, kNumJoints> joint_accel{};
  double omega_x = 0.0;
  double omega_y = 0.0;
  double theta = 0.0;
  std::array<double, 2> a_body{};
  double r_velocity = 0.0;
  double r_omega = 0.0;   // penalty, subtracted
  double r_torque = 0.0;  // penalty, subtracted
  double r_accel = 0.0;   // penalty, subtracted
  bool fell = false;
};

struct StepResult {
  Observation obs{};
  double reward = 0.0;
  bool done = false;
  StepInfo info{};
};

Observation observe(const WalkerConfig& cfg, const WalkerState& state);

// All instances of a terrain start at the same pose: x=0, q=qdot=0, v=0,
// theta matching the local grade. The seed only feeds the state's RNG.
WalkerState env_reset(const WalkerConfig& cfg, std::uint64_t seed);

// Advances one control step; see the inline comments for the exact update
// order. Throws on non-finite action entries.
StepResult env_step(const WalkerConfig& cfg, WalkerState& state,
                    std::span<const double> action);

// Completed-episode statistics emitted by the vectorized wrapper.
struct EpisodeStats {
  int env_index = 0;
  double episode_return = 0.0;
  int length = 0;
  bool fell = false;
};

// n independent walker instances stepped in lockstep; instance i is seeded
// seeds[i] and auto-resets when its episode ends.
class VecEnv {
 public:
  VecEnv(const WalkerConfig& cfg, std::vector<std::uint64_t> seeds);
  VecEnv(const WalkerConfig& cfg, int n, std::uint64_t base_seed);

  int size() const { return static_cast<int>(states_.size()); }
  const WalkerConfig& config() const { return cfg_; }
  const Observation& obs(int i) const { return observations_[i]; }
  const WalkerState& state(int i) const { return states_[i]; }

  // Steps every instance with its row of `actions` (n x kNumJoints, row-major).
  // Each StepResult keeps the true successor observation; instances that
  // finish are reset in place (obs(i) then gives the fresh episode's first
  // observation) and their stats are appended to `completed`.
  void step(std::span<const double> actions, std::vector<StepResult>& results,
            std::vector<EpisodeStats>& completed);

  void reset_all();

 private:
  WalkerConfig cfg_;
  std::vector<std::uint64_t> seeds_;
  std::vector<WalkerState> states_;
  std::vector<Observation> observations_;
  std::vector<double> returns_;
  std::vector<int> lengths_;
};

}  // namespace ecim
