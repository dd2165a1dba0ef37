#pragma once

#include <cstdint>
#include <vector>

#include "ecim/matrix.hpp"
#include "ecim/mlp.hpp"
#include "ecim/params.hpp"
#include "ecim/rng.hpp"
#include "ecim/walker_env.hpp"

namespace ecim {

// Diagonal-Gaussian policy: an MLP producing mean actions plus a free
// per-dimension log-std parameter (state-independent), kept in [-5, 2].
struct GaussianPolicy {
  MlpParams net;
  std::vector<double> log_std;

  int action_dim() const { return net.output_dim(); }
  void clamp_log_std();
};

struct GaussianPolicyGrads {
  MlpGrads net;
  std::vector<double> dlog_std;
  void zero();
};

GaussianPolicy make_policy(int obs_dim, std::span<const int> hidden, int action_dim, Rng& rng);
GaussianPolicyGrads make_policy_grads(const GaussianPolicy& policy);
ParamBlocks policy_param_blocks(GaussianPolicy& policy);
ParamBlocks policy_grad_blocks(GaussianPolicyGrads& grads);

// One iteration's worth of transitions, flattened (env-major) as
// row = env * horizon + t. next_obs is the true successor observation even
// on terminal steps (the auto-reset obs never enters the batch).
struct RolloutBatch {
  int n_envs = 0;
  int horizon = 0;
  Matrix obs;       // (n*h) x obs_dim
  Matrix next_obs;  // (n*h) x obs_dim
  Matrix actions;   // (n*h) x action_dim
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;      // extrinsic r_t
  std::vector<double> r_icm;
  std::vector<double> r_rnd;
  std::vector<double> r_cnt;
  std::vector<double> r_combined;   // r-tilde, what GAE consumes
  std::vector<std::uint8_t> dones;
  std::vector<StepInfo> infos;
  std::vector<double> bootstrap_values;  // V(s_{h}) per env
  std::vector<EpisodeStats> completed;   // in completion order (step-major)

  int rows() const { return n_envs * horizon; }
  int index(int env, int t) const { return env * horizon + t; }
};

struct AdvantageSet {
  std::vector<double> advantages;
  std::vector<double> value_targets;
};

// Rolls the policy in the vectorized env for `horizon` steps. Actions are
// sampled a ~ N(mu(s), exp(log_std)) from `rng` (one normal draw per action
// dimension, env-major within each step); log-probs and values are recorded
// at sample time. r_combined starts as a copy of the extrinsic rewards.
RolloutBatch collect(const GaussianPolicy& policy, const MlpParams& value_net,
                     VecEnv& env, int horizon, Rng& rng);

// GAE over one env's contiguous slice:
//   delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t
//   A_t     = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
// with V_{h} = bootstrap. value_targets = A + V.
AdvantageSet gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap,
                 double gamma, double lambda);

// Batch-level GAE: applies the recursion per env slice.
AdvantageSet gae_batch(const RolloutBatch& batch, double gamma, double lambda);

// In-place: zero mean, unit population std; if std < 1e-8 only the mean is
// removed.
void normalize_advantages(std::span<double> adv);

}  // namespace ecim
