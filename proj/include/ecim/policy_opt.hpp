#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ecim/adam.hpp"
#include "ecim/rollout.hpp"

namespace ecim {

struct PpoCoeffs {
  double clip_eps = 0.2;
  double value_coef = 0.5;      // c1
  int epochs = 5;
  int minibatches = 4;
  double learning_rate = 1e-3;
  double desired_kl = 0.01;     // adaptive-LR target
  double lr_min = 1e-6;
  double lr_max = 1e-2;
};

struct SmoothCoeffs {
  double lambda_t = 0.05;
  double lambda_s = 0.05;
  double sigma = 0.05;          // spatial perturbation std
  int max_pairs = 1024;         // per-minibatch cap for L_T / L_S terms
};

enum class EntropyMode { kAdaptive, kFixed };
enum class EntropySchedule { kReturnProportional, kReturnComplement };

// Adaptive entropy coefficient driven by a moving window of episode returns:
//   R_t    = mean of the last tau episode returns
//   beta_t = beta_max * clamp(R_t, 0, R_max) / R_max        (proportional)
//   beta_t = beta_max * (1 - clamp(R_t, 0, R_max) / R_max)  (complement)
// In fixed mode beta_t is a constant (the PPO / minus-AECPOM setting).
class EntropyScheduler {
 public:
  EntropyScheduler(EntropyMode mode, EntropySchedule schedule, double beta_max,
                   double fixed_beta, int tau, std::optional<double> fixed_r_max);

  // Appends the newly completed episode returns (oldest dropped beyond tau),
  // refreshes R_max in auto mode (1.1 x the best return seen so far), and
  // recomputes beta_t.
  double update(std::span<const double> episode_returns);

  double beta() const { return beta_; }
  double r_max() const { return r_max_; }
  double window_mean() const;
  const std::vector<double>& window() const { return window_; }

 private:
  EntropyMode mode_;
  EntropySchedule schedule_;
  double beta_max_;
  double fixed_beta_;
  int tau_;
  bool auto_r_max_;
  double r_max_;
  double best_return_ = 0.0;
  bool any_return_ = false;
  std::vector<double> window_;
  double beta_;
};

// exp(logp_new - logp_old), clamped to [1e-8, 1e8].
double importance_ratio(double logp_new, double logp_old);

// Per-sample objective to MAXIMIZE: min(ratio*adv, clip(ratio, 1-eps, 1+eps)*adv).
double clipped_surrogate(double ratio, double adv, double eps);

// Mean squared error between value predictions and targets.
double value_loss(std::span<const double> v, std::span<const double> v_target);

// L_T = mean over pairs of ||mu(s_b) - mu(s_a)||^2 (policy mean actions).
// Rows of states_a/states_b pair up. Pass grads to accumulate d(L_T)/d(params)
// scaled by `weight` through both branches.
double temporal_smoothness(const GaussianPolicy& policy, const Matrix& states_a,
                           const Matrix& states_b, double weight, MlpGrads* grads);

// L_S single-sample estimator: one s' ~ N(s, sigma^2 I) per state,
// mean ||mu(s') - mu(s)||^2, gradients through both branches.
double spatial_smoothness(const GaussianPolicy& policy, const Matrix& states,
                          double sigma, Rng& rng, double weight, MlpGrads* grads);

struct UpdateStats {
  double surrogate = 0.0;   // mean maximized objective
  double value_loss = 0.0;
  double entropy = 0.0;
  double beta = 0.0;
  double l_t = 0.0;
  double l_s = 0.0;
  double kl = 0.0;          // mean over minibatches of the k3 estimator
  double clip_fraction = 0.0;
  double grad_norm = 0.0;   // mean policy-gradient L2 norm
  double learning_rate = 0.0;
  int skipped_minibatches = 0;
  double total_loss = 0.0;  // mean minimized objective
};

// One minibatch's objective terms, as accumulated by minibatch_eval.
struct MinibatchTerms {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double l_t = 0.0;
  double l_s = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double total = 0.0;  // minimized objective
};

// The update target: policy + value function with their optimizer states.
struct Learner {
  GaussianPolicy policy;
  MlpParams value_net;
  AdamState policy_adam;
  AdamState value_adam;
};

Learner make_learner(int obs_dim, std::span<const int> policy_hidden,
                     std::span<const int> value_hidden, int action_dim, double lr,
                     Rng& policy_rng, Rng& value_rng);

// The per-minibatch computation inside ppo_update: evaluates
//   total = -surrogate + c1*value_loss + lambda_T*L_T + lambda_S*L_S - beta*H
// over the batch rows listed in `rows` (in that order, which also selects
// the smoothness sub-samples) and accumulates the parameter gradients.
// Exposed so gradient verification exercises exactly the production path.
MinibatchTerms minibatch_eval(const Learner& learner, const RolloutBatch& batch,
                              std::span<const double> advantages,
                              std::span<const double> value_targets,
                              std::span<const int> rows, double beta,
                              const PpoCoeffs& ppo, const SmoothCoeffs& smooth,
                              Rng& smooth_rng, GaussianPolicyGrads& policy_grads,
                              MlpGrads& value_grads);

// `epochs` passes of `minibatches` shuffled minibatches over the batch.
// Per minibatch the loss is
//   -mean surrogate + c1 * value_loss + lambda_T*L_T + lambda_S*L_S - beta*entropy
// followed by one Adam step on policy and value nets; the learning rate
// adapts on the k3 KL estimate (halve above 2*desired, x1.5 below half).
// Minibatches with non-finite losses or gradients are skipped and counted.
UpdateStats ppo_update(Learner& learner, const RolloutBatch& batch,
                       std::span<const double> advantages,
                       std::span<const double> value_targets, double beta,
                       const PpoCoeffs& ppo, const SmoothCoeffs& smooth,
                       Rng& shuffle_rng, Rng& smooth_rng);

}  // namespace ecim
