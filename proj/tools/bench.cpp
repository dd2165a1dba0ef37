// Micro-benchmark for the dense kernels and one full training iteration.
// Used to size the desk-scale defaults; not part of the test suite.

#include <chrono>
#include <cstdio>

#include "ecim/config.hpp"
#include "ecim/experiment.hpp"
#include "ecim/intrinsic.hpp"
#include "ecim/mlp.hpp"
#include "ecim/policy_opt.hpp"

using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int main() {
  using namespace ecim;

  // GEMM throughput at the training shapes.
  {
    Rng rng(7);
    const int n = 6400, in = 64, out = 64;
    Matrix a(n, in), w(out, in);
    for (double& v : a.data) v = rng.normal();
    for (double& v : w.data) v = rng.normal();
    Matrix c;
    const int reps = 50;
    const auto start = Clock::now();
    for (int r = 0; r < reps; ++r) matmul_nt(a, w, c);
    const double dt = seconds_since(start);
    const double flops = 2.0 * n * in * out * reps;
    std::printf("matmul_nt %dx%dx%d: %.3f ms/rep, %.2f GFLOP/s\n", n, in, out,
                1e3 * dt / reps, flops / dt / 1e9);
  }

  // One full training iteration at the default scale.
  {
    TrainConfig cfg;
    cfg.n_envs = 64;
    cfg.iterations = 1;
    Rng prng(1, kStreamPolicyInit), vrng(1, kStreamValueInit);
    Learner learner = make_learner(kObsDim, cfg.policy_hidden, cfg.value_hidden, kNumJoints,
                                   cfg.ppo.learning_rate, prng, vrng);
    WalkerConfig wc = cfg.env;
    wc.terrain = cfg.terrain;
    VecEnv env(wc, cfg.n_envs, 1234);
    Rng action_rng(1, kStreamActions), shuffle_rng(1, kStreamShuffle),
        smooth_rng(1, kStreamSmoothness);
    Rng e1(1, 3), e2(1, 4), e3(1, 5), r1(1, 6), r2(1, 7);
    IcmNets icm = make_icm(kObsDim, kNumJoints, 0.1, 1e-3, e1, e2, e3);
    RndNets rnd = make_rnd(kObsDim, 0.1, 1e-3, r1, r2);
    DensityModel density(kObsDim);
    IntrinsicNormalizer normalizer;

    auto start = Clock::now();
    RolloutBatch batch = collect(learner.policy, learner.value_net, env, wc.horizon, action_rng);
    std::printf("collect: %.3f s\n", seconds_since(start));

    start = Clock::now();
    batch.r_icm = icm_reward(icm, batch.obs, batch.actions, batch.next_obs);
    batch.r_rnd = rnd_reward(rnd, batch.obs);
    for (int i = 0; i < batch.rows(); ++i) {
      batch.r_cnt[i] = count_bonus_for(
          density, std::span<const double>(batch.obs.row(i), kObsDim), 0.05);
      batch.r_combined[i] = combine_rewards(batch.rewards[i], batch.r_icm[i], batch.r_rnd[i],
                                            batch.r_cnt[i], normalizer);
    }
    std::printf("intrinsic rewards: %.3f s\n", seconds_since(start));

    start = Clock::now();
    icm_train(icm, batch.obs, batch.actions, batch.next_obs);
    rnd_train(rnd, batch.obs);
    std::printf("intrinsic train (full batch): %.3f s\n", seconds_since(start));

    start = Clock::now();
    AdvantageSet adv = gae_batch(batch, cfg.gamma, cfg.lambda_gae);
    normalize_advantages(adv.advantages);
    std::printf("gae: %.3f s\n", seconds_since(start));

    start = Clock::now();
    UpdateStats stats = ppo_update(learner, batch, adv.advantages, adv.value_targets, 0.01,
                                   cfg.ppo, cfg.smooth, shuffle_rng, smooth_rng);
    std::printf("ppo_update: %.3f s (kl=%.4g)\n", seconds_since(start), stats.kl);
  }
  return 0;
}
