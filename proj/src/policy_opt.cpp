#include "ecim/policy_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecim/gaussian.hpp"

namespace ecim {

namespace {
constexpr double kRMaxFloor = 1e-6;
}

EntropyScheduler::EntropyScheduler(EntropyMode mode, EntropySchedule schedule,
                                   double beta_max, double fixed_beta, int tau,
                                   std::optional<double> fixed_r_max)
    : mode_(mode), schedule_(schedule), beta_max_(beta_max), fixed_beta_(fixed_beta),
      tau_(tau), auto_r_max_(!fixed_r_max.has_value()),
      r_max_(fixed_r_max.value_or(kRMaxFloor)) {
  if (tau_ < 1) throw std::invalid_argument("EntropyScheduler: tau must be >= 1");
  if (!auto_r_max_ && r_max_ <= 0.0) throw std::invalid_argument("EntropyScheduler: R_max must be > 0");
  if (beta_max_ < 0.0) throw std::invalid_argument("EntropyScheduler: beta_max must be >= 0");
  switch (mode_) {
    case EntropyMode::kFixed: beta_ = fixed_beta_; break;
    case EntropyMode::kAdaptive:
      beta_ = schedule_ == EntropySchedule::kReturnProportional ? 0.0 : beta_max_;
      break;
  }
}

double EntropyScheduler::window_mean() const {
  if (window_.empty()) return 0.0;
  double sum = 0.0;
  for (double g : window_) sum += g;
  return sum / static_cast<double>(window_.size());
}

double EntropyScheduler::update(std::span<const double> episode_returns) {
  for (double g : episode_returns) {
    window_.push_back(g);
    best_return_ = any_return_ ? std::max(best_return_, g) : g;
    any_return_ = true;
  }
  if (window_.size() > static_cast<std::size_t>(tau_)) {
    window_.erase(window_.begin(), window_.end() - tau_);
  }
  if (auto_r_max_) {
    r_max_ = std::max(any_return_ ? 1.1 * best_return_ : kRMaxFloor, kRMaxFloor);
  }
  if (mode_ == EntropyMode::kFixed) {
    beta_ = fixed_beta_;
    return beta_;
  }
  const double ratio = std::clamp(window_mean(), 0.0, r_max_) / r_max_;
  beta_ = schedule_ == EntropySchedule::kReturnProportional ? beta_max_ * ratio
                                                            : beta_max_ * (1.0 - ratio);
  return beta_;
}

double importance_ratio(double logp_new, double logp_old) {
  return std::clamp(std::exp(logp_new - logp_old), 1e-8, 1e8);
}

double clipped_surrogate(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * adv, clipped * adv);
}

double value_loss(std::span<const double> v, std::span<const double> v_target) {
  if (v.size() != v_target.size() || v.empty()) {
    throw std::invalid_argument("value_loss: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - v_target[i];
    total += d * d;
  }
  return total / static_cast<double>(v.size());
}

namespace {

// Shared quadratic-difference pass for both smoothness terms: returns
// mean ||mu_b - mu_a||^2 and accumulates weight-scaled gradients through
// BOTH forward branches.
double mean_action_gap(const GaussianPolicy& policy, const Matrix& states_a,
                       const Matrix& states_b, double weight, MlpGrads* grads) {
  if (states_a.rows == 0) return 0.0;
  thread_local MlpCache cache_a, cache_b;
  thread_local Matrix db;
  const Matrix& mu_a = mlp_forward_cached(policy.net, states_a, cache_a);
  const Matrix& mu_b = mlp_forward_cached(policy.net, states_b, cache_b);
  const double inv_n = 1.0 / states_a.rows;
  double total = 0.0;
  detail::ensure_shape(db, mu_a.rows, mu_a.cols);
  for (std::size_t k = 0; k < mu_a.data.size(); ++k) {
    const double diff = mu_b.data[k] - mu_a.data[k];
    total += diff * diff;
    db.data[k] = 2.0 * diff * inv_n * weight;
  }
  if (grads != nullptr) {
    mlp_backward(policy.net, cache_b, db, *grads);
    for (double& v : db.data) v = -v;
    mlp_backward(policy.net, cache_a, db, *grads);
  }
  return total * inv_n;
}

}  // namespace

double temporal_smoothness(const GaussianPolicy& policy, const Matrix& states_a,
                           const Matrix& states_b, double weight, MlpGrads* grads) {
  if (states_a.rows != states_b.rows || states_a.cols != states_b.cols) {
    throw std::invalid_argument("temporal_smoothness: pair shape mismatch");
  }
  return mean_action_gap(policy, states_a, states_b, weight, grads);
}

double spatial_smoothness(const GaussianPolicy& policy, const Matrix& states,
                          double sigma, Rng& rng, double weight, MlpGrads* grads) {
  if (sigma <= 0.0) throw std::invalid_argument("spatial_smoothness: sigma must be > 0");
  thread_local Matrix perturbed;
  perturbed = states;
  for (double& v : perturbed.data) v += sigma * rng.normal();
  return mean_action_gap(policy, states, perturbed, weight, grads);
}

Learner make_learner(int obs_dim, std::span<const int> policy_hidden,
                     std::span<const int> value_hidden, int action_dim, double lr,
                     Rng& policy_rng, Rng& value_rng) {
  Learner learner{make_policy(obs_dim, policy_hidden, action_dim, policy_rng),
                  make_mlp(obs_dim, value_hidden, 1, value_rng), AdamState(0, lr),
                  AdamState(0, lr)};
  learner.policy_adam = AdamState(learner.policy.net.param_count() +
                                      learner.policy.log_std.size(),
                                  lr);
  learner.value_adam = AdamState(learner.value_net.param_count(), lr);
  return learner;
}

namespace {

bool all_finite(const ParamBlocks& view) {
  for (const auto& b : view.blocks) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double l2_norm(const ParamBlocks& view) {
  double total = 0.0;
  for (const auto& b : view.blocks) {
    for (double v : b) total += v * v;
  }
  return std::sqrt(total);
}

}  // namespace

MinibatchTerms minibatch_eval(const Learner& learner, const RolloutBatch& batch,
                              std::span<const double> advantages,
                              std::span<const double> value_targets,
                              std::span<const int> rows, double beta,
                              const PpoCoeffs& ppo, const SmoothCoeffs& smooth,
                              Rng& smooth_rng, GaussianPolicyGrads& policy_grads,
                              MlpGrads& value_grads) {
  const GaussianPolicy& policy = learner.policy;
  const int adim = policy.action_dim();
  const int m = static_cast<int>(rows.size());
  MinibatchTerms terms;
  if (m <= 0) return terms;

  // Scratch persists across calls so the whole update is allocation-free in
  // the steady state; every buffer is fully written before it is read.
  thread_local Matrix x, acts, dmu, dv;
  thread_local MlpCache policy_cache, value_cache;
  detail::ensure_shape(x, m, batch.obs.cols);
  detail::ensure_shape(acts, m, adim);
  for (int i = 0; i < m; ++i) {
    const int idx = rows[i];
    std::copy(batch.obs.row(idx), batch.obs.row(idx) + batch.obs.cols, x.row(i));
    std::copy(batch.actions.row(idx), batch.actions.row(idx) + adim, acts.row(i));
  }

  const Matrix& mu = mlp_forward_cached(policy.net, x, policy_cache);
  const Matrix& v = mlp_forward_cached(learner.value_net, x, value_cache);

  policy_grads.zero();
  value_grads.zero();
  detail::ensure_shape(dmu, m, adim);
  dmu.zero();  // gaussian_logprob_backward accumulates
  detail::ensure_shape(dv, m, 1);

  const double inv_m = 1.0 / m;
  double surr_sum = 0.0, vloss_sum = 0.0, kl_sum = 0.0;
  int clipped_count = 0;
  for (int i = 0; i < m; ++i) {
    const int idx = rows[i];
    const double adv = advantages[idx];
    const std::span<const double> mu_row(mu.row(i), adim);
    const std::span<const double> act_row(acts.row(i), adim);
    const double logp_new = gaussian_logprob(mu_row, policy.log_std, act_row);
    const double ratio = importance_ratio(logp_new, batch.log_probs[idx]);
    const double clipped = std::clamp(ratio, 1.0 - ppo.clip_eps, 1.0 + ppo.clip_eps);
    const double term_raw = ratio * adv;
    const double term_clip = clipped * adv;
    surr_sum += std::min(term_raw, term_clip);
    // Gradient flows through the raw branch only when it attains the min.
    const double dsurr_dlogp = term_raw <= term_clip ? ratio * adv : 0.0;
    gaussian_logprob_backward(mu_row, policy.log_std, act_row, -dsurr_dlogp * inv_m,
                              std::span<double>(dmu.row(i), adim), policy_grads.dlog_std);
    if (std::abs(ratio - 1.0) > ppo.clip_eps) ++clipped_count;
    kl_sum += (ratio - 1.0) - (logp_new - batch.log_probs[idx]);

    const double verr = v(i, 0) - value_targets[idx];
    vloss_sum += verr * verr;
    dv(i, 0) = ppo.value_coef * 2.0 * verr * inv_m;
  }
  terms.surrogate = surr_sum * inv_m;
  terms.value_loss = vloss_sum * inv_m;
  terms.kl = kl_sum * inv_m;
  terms.clip_fraction = static_cast<double>(clipped_count) * inv_m;
  terms.entropy = gaussian_entropy(policy.log_std);
  for (double& g : policy_grads.dlog_std) g -= beta;  // d(-beta*H)/d log_std

  mlp_backward(policy.net, policy_cache, dmu, policy_grads.net);
  mlp_backward(learner.value_net, value_cache, dv, value_grads);

  // Smoothness terms: consecutive same-episode pairs (L_T) and Gaussian
  // state perturbations (L_S), capped at max_pairs rows taken in the
  // given (shuffled) row order.
  if (smooth.lambda_t > 0.0) {
    thread_local std::vector<int> firsts;
    firsts.clear();
    for (int i = 0; i < m && static_cast<int>(firsts.size()) < smooth.max_pairs; ++i) {
      const int idx = rows[i];
      const int t = idx % batch.horizon;
      if (t + 1 < batch.horizon && batch.dones[idx] == 0) firsts.push_back(idx);
    }
    if (!firsts.empty()) {
      thread_local Matrix xa, xb;
      detail::ensure_shape(xa, static_cast<int>(firsts.size()), batch.obs.cols);
      detail::ensure_shape(xb, static_cast<int>(firsts.size()), batch.obs.cols);
      for (std::size_t i = 0; i < firsts.size(); ++i) {
        std::copy(batch.obs.row(firsts[i]), batch.obs.row(firsts[i]) + batch.obs.cols,
                  xa.row(static_cast<int>(i)));
        std::copy(batch.obs.row(firsts[i] + 1), batch.obs.row(firsts[i] + 1) + batch.obs.cols,
                  xb.row(static_cast<int>(i)));
      }
      terms.l_t = temporal_smoothness(policy, xa, xb, smooth.lambda_t, &policy_grads.net);
    }
  }
  if (smooth.lambda_s > 0.0) {
    const int ns = std::min(m, smooth.max_pairs);
    thread_local Matrix xs;
    detail::ensure_shape(xs, ns, batch.obs.cols);
    for (int i = 0; i < ns; ++i) {
      const int idx = rows[i];
      std::copy(batch.obs.row(idx), batch.obs.row(idx) + batch.obs.cols, xs.row(i));
    }
    terms.l_s = spatial_smoothness(policy, xs, smooth.sigma, smooth_rng, smooth.lambda_s,
                                   &policy_grads.net);
  }

  terms.total = -terms.surrogate + ppo.value_coef * terms.value_loss +
                smooth.lambda_t * terms.l_t + smooth.lambda_s * terms.l_s -
                beta * terms.entropy;
  return terms;
}

UpdateStats ppo_update(Learner& learner, const RolloutBatch& batch,
                       std::span<const double> advantages,
                       std::span<const double> value_targets, double beta,
                       const PpoCoeffs& ppo, const SmoothCoeffs& smooth,
                       Rng& shuffle_rng, Rng& smooth_rng) {
  const int n = batch.rows();
  if (advantages.size() != static_cast<std::size_t>(n) ||
      value_targets.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("ppo_update: advantage shape mismatch");
  }
  GaussianPolicy& policy = learner.policy;
  double lr = learner.policy_adam.lr;

  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  UpdateStats stats;
  stats.beta = beta;
  int used_minibatches = 0;

  GaussianPolicyGrads policy_grads = make_policy_grads(policy);
  MlpGrads value_grads = make_grads(learner.value_net);

  for (int epoch = 0; epoch < ppo.epochs; ++epoch) {
    shuffle(indices, shuffle_rng);
    for (int mb = 0; mb < ppo.minibatches; ++mb) {
      const int start = static_cast<int>(static_cast<std::int64_t>(n) * mb / ppo.minibatches);
      const int end = static_cast<int>(static_cast<std::int64_t>(n) * (mb + 1) / ppo.minibatches);
      const int m = end - start;
      if (m <= 0) continue;

      const MinibatchTerms terms = minibatch_eval(
          learner, batch, advantages, value_targets,
          std::span<const int>(indices.data() + start, static_cast<std::size_t>(m)), beta,
          ppo, smooth, smooth_rng, policy_grads, value_grads);

      ParamBlocks pgrads = policy_grad_blocks(policy_grads);
      ParamBlocks vgrads = grad_blocks(value_grads);
      if (!std::isfinite(terms.total) || !all_finite(pgrads) || !all_finite(vgrads)) {
        stats.skipped_minibatches += 1;
        continue;
      }

      learner.policy_adam.lr = lr;
      learner.value_adam.lr = lr;
      adam_step(policy_param_blocks(policy), pgrads, learner.policy_adam);
      policy.clamp_log_std();
      adam_step(param_blocks(learner.value_net), vgrads, learner.value_adam);

      if (terms.kl > 2.0 * ppo.desired_kl) {
        lr = std::max(lr / 2.0, ppo.lr_min);
      } else if (terms.kl < ppo.desired_kl / 2.0) {
        lr = std::min(lr * 1.5, ppo.lr_max);
      }

      stats.surrogate += terms.surrogate;
      stats.value_loss += terms.value_loss;
      stats.entropy += terms.entropy;
      stats.l_t += terms.l_t;
      stats.l_s += terms.l_s;
      stats.kl += terms.kl;
      stats.clip_fraction += terms.clip_fraction;
      stats.grad_norm += l2_norm(pgrads);
      stats.total_loss += terms.total;
      ++used_minibatches;
    }
  }

  learner.policy_adam.lr = lr;
  learner.value_adam.lr = lr;
  if (used_minibatches > 0) {
    const double inv = 1.0 / used_minibatches;
    stats.surrogate *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.l_t *= inv;
    stats.l_s *= inv;
    stats.kl *= inv;
    stats.clip_fraction *= inv;
    stats.grad_norm *= inv;
    stats.total_loss *= inv;
  }
  stats.learning_rate = lr;
  return stats;
}

}  // namespace ecim
