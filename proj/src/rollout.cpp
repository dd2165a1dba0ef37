#include "ecim/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecim/gaussian.hpp"

namespace ecim {

void GaussianPolicy::clamp_log_std() {
  for (double& ls : log_std) ls = std::clamp(ls, kLogStdMin, kLogStdMax);
}

void GaussianPolicyGrads::zero() {
  net.zero();
  std::fill(dlog_std.begin(), dlog_std.end(), 0.0);
}

GaussianPolicy make_policy(int obs_dim, std::span<const int> hidden, int action_dim, Rng& rng) {
  GaussianPolicy policy;
  policy.net = make_mlp(obs_dim, hidden, action_dim, rng);
  policy.log_std.assign(action_dim, 0.0);
  return policy;
}

GaussianPolicyGrads make_policy_grads(const GaussianPolicy& policy) {
  GaussianPolicyGrads grads;
  grads.net = make_grads(policy.net);
  grads.dlog_std.assign(policy.log_std.size(), 0.0);
  return grads;
}

ParamBlocks policy_param_blocks(GaussianPolicy& policy) {
  ParamBlocks view = param_blocks(policy.net);
  view.blocks.emplace_back(policy.log_std);
  return view;
}

ParamBlocks policy_grad_blocks(GaussianPolicyGrads& grads) {
  ParamBlocks view = grad_blocks(grads.net);
  view.blocks.emplace_back(grads.dlog_std);
  return view;
}

RolloutBatch collect(const GaussianPolicy& policy, const MlpParams& value_net,
                     VecEnv& env, int horizon, Rng& rng) {
  const int n = env.size();
  const int adim = policy.action_dim();
  RolloutBatch batch;
  batch.n_envs = n;
  batch.horizon = horizon;
  const int rows = n * horizon;
  batch.obs = Matrix(rows, kObsDim);
  batch.next_obs = Matrix(rows, kObsDim);
  batch.actions = Matrix(rows, adim);
  batch.log_probs.resize(rows);
  batch.values.resize(rows);
  batch.rewards.resize(rows);
  batch.r_icm.assign(rows, 0.0);
  batch.r_rnd.assign(rows, 0.0);
  batch.r_cnt.assign(rows, 0.0);
  batch.r_combined.resize(rows);
  batch.dones.resize(rows);
  batch.infos.resize(rows);
  batch.bootstrap_values.resize(n);

  Matrix step_obs(n, kObsDim);
  Matrix step_actions(n, adim);
  std::vector<StepResult> results;
  std::vector<double> sigma(adim);
  for (int d = 0; d < adim; ++d) sigma[d] = std::exp(policy.log_std[d]);

  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      const Observation& o = env.obs(i);
      std::copy(o.begin(), o.end(), step_obs.row(i));
    }
    const Matrix means = mlp_forward(policy.net, step_obs);
    const Matrix values = mlp_forward(value_net, step_obs);
    for (int i = 0; i < n; ++i) {
      const double* mu = means.row(i);
      double* act = step_actions.row(i);
      for (int d = 0; d < adim; ++d) act[d] = mu[d] + sigma[d] * rng.normal();
    }
    env.step(std::span<const double>(step_actions.data), results, batch.completed);
    for (int i = 0; i < n; ++i) {
      const int idx = batch.index(i, t);
      std::copy(step_obs.row(i), step_obs.row(i) + kObsDim, batch.obs.row(idx));
      std::copy(results[i].obs.begin(), results[i].obs.end(), batch.next_obs.row(idx));
      std::copy(step_actions.row(i), step_actions.row(i) + adim, batch.actions.row(idx));
      batch.log_probs[idx] = gaussian_logprob(
          std::span<const double>(means.row(i), adim), policy.log_std,
          std::span<const double>(step_actions.row(i), adim));
      batch.values[idx] = values(i, 0);
      batch.rewards[idx] = results[i].reward;
      batch.dones[idx] = results[i].done ? 1 : 0;
      batch.infos[idx] = results[i].info;
    }
  }

  // Bootstrap values at the post-rollout observations (reset obs if the env
  // just finished; irrelevant then because done cuts the recursion).
  for (int i = 0; i < n; ++i) {
    const Observation& o = env.obs(i);
    std::copy(o.begin(), o.end(), step_obs.row(i));
  }
  const Matrix boot = mlp_forward(value_net, step_obs);
  for (int i = 0; i < n; ++i) batch.bootstrap_values[i] = boot(i, 0);

  batch.r_combined = batch.rewards;
  return batch;
}

AdvantageSet gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap,
                 double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("gae: shape mismatch");
  AdvantageSet out;
  out.advantages.resize(n);
  out.value_targets.resize(n);
  double next_adv = 0.0;
  double next_value = bootstrap;
  for (std::size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * not_done - values[i];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.advantages[i] = next_adv;
    out.value_targets[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

AdvantageSet gae_batch(const RolloutBatch& batch, double gamma, double lambda) {
  AdvantageSet out;
  out.advantages.resize(batch.rows());
  out.value_targets.resize(batch.rows());
  for (int e = 0; e < batch.n_envs; ++e) {
    const std::size_t off = static_cast<std::size_t>(e) * batch.horizon;
    const std::size_t len = batch.horizon;
    AdvantageSet part = gae(
        std::span<const double>(batch.r_combined.data() + off, len),
        std::span<const double>(batch.values.data() + off, len),
        std::span<const std::uint8_t>(batch.dones.data() + off, len),
        batch.bootstrap_values[e], gamma, lambda);
    std::copy(part.advantages.begin(), part.advantages.end(), out.advantages.begin() + off);
    std::copy(part.value_targets.begin(), part.value_targets.end(), out.value_targets.begin() + off);
  }
  return out;
}

void normalize_advantages(std::span<double> adv) {
  if (adv.size() < 2) throw std::invalid_argument("normalize_advantages: need at least 2 elements");
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double std = std::sqrt(var);
  if (std < 1e-8) {
    for (double& a : adv) a -= mean;
  } else {
    for (double& a : adv) a = (a - mean) / std;
  }
}

}  // namespace ecim
