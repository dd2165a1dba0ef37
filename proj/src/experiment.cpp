#include "ecim/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ecim/checkpoint.hpp"
#include "ecim/csv.hpp"
#include "ecim/intrinsic.hpp"
#include "ecim/policy_opt.hpp"
#include "json.hpp"

namespace ecim {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// All numeric log output goes through one formatter so byte-identical logs
// follow from identical arithmetic. %.17g round-trips doubles exactly.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return kNan;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

EntropyMode entropy_mode_from(const std::string& name) {
  return name == "fixed" ? EntropyMode::kFixed : EntropyMode::kAdaptive;
}

EntropySchedule entropy_schedule_from(const std::string& name) {
  return name == "return_complement" ? EntropySchedule::kReturnComplement
                                     : EntropySchedule::kReturnProportional;
}

// Deterministic subsample for predictor training: every stride-th row,
// starting at 0, capped at max_rows. No RNG involved, so enabling one
// intrinsic source never perturbs another's draws.
std::vector<int> stride_indices(int rows, int max_rows) {
  if (max_rows <= 0 || rows <= max_rows) {
    std::vector<int> idx(rows);
    for (int i = 0; i < rows; ++i) idx[i] = i;
    return idx;
  }
  std::vector<int> idx;
  idx.reserve(max_rows);
  const int stride = (rows + max_rows - 1) / max_rows;
  for (int i = 0; i < rows && static_cast<int>(idx.size()) < max_rows; i += stride) {
    idx.push_back(i);
  }
  return idx;
}

Matrix gather_rows(const Matrix& src, const std::vector<int>& idx) {
  Matrix out(static_cast<int>(idx.size()), src.cols);
  for (int i = 0; i < out.rows; ++i) {
    const double* from = src.row(idx[i]);
    std::copy(from, from + src.cols, out.row(i));
  }
  return out;
}

// One deterministic evaluation episode: actions are the policy mean.
EpisodeTrace eval_episode(const WalkerConfig& wc, const GaussianPolicy& policy,
                          std::uint64_t seed) {
  EpisodeTrace trace;
  trace.dt = wc.dt;
  WalkerState state = env_reset(wc, seed);
  std::vector<double> action(static_cast<std::size_t>(policy.action_dim()));
  for (int t = 0; t < wc.horizon; ++t) {
    const Observation obs = observe(wc, state);
    std::vector<double> mu = mlp_forward(policy.net, std::span<const double>(obs));
    std::copy(mu.begin(), mu.end(), action.begin());
    StepResult res = env_step(wc, state, action);
    trace.theta.push_back(res.info.theta);
    trace.omega.push_back({res.info.omega_x, res.info.omega_y, 0.0});
    trace.joint_vel.push_back(std::vector<double>(state.qdot.begin(), state.qdot.end()));
    trace.torque.push_back(
        std::vector<double>(res.info.torque.begin(), res.info.torque.end()));
    trace.body_accel.push_back(res.info.a_body);
    trace.actions.push_back(action);
    trace.rewards.push_back(res.reward);
    if (res.done) break;
  }
  return trace;
}

struct EvalRow {
  double eval_return = 0.0;
  double pitch = 0.0;
  double acc = 0.0;
  double torque = 0.0;
  double jacc = 0.0;
  double adiff = 0.0;
  double ang_vel = 0.0;
  double mean_length = 0.0;
  int falls = 0;
};

EvalRow evaluate(const WalkerConfig& wc, const GaussianPolicy& policy,
                 std::span<const std::uint64_t> seeds) {
  EvalRow row;
  const double n = static_cast<double>(seeds.size());
  for (std::uint64_t seed : seeds) {
    EpisodeTrace trace = eval_episode(wc, policy, seed);
    row.eval_return += episode_return(trace.rewards) / n;
    row.pitch += pitch_rms(trace) / n;
    row.acc += acc_rms(trace) / n;
    row.torque += torque_rms(trace) / n;
    row.jacc += joint_accel_rms(trace) / n;
    row.adiff += action_diff_rms(trace) / n;
    row.ang_vel += ang_vel_energy(trace) / n;
    row.mean_length += static_cast<double>(trace.rewards.size()) / n;
    if (static_cast<int>(trace.rewards.size()) < wc.horizon) ++row.falls;
  }
  return row;
}

std::vector<double> snapshot_params(ParamBlocks blocks) { return blocks.to_flat(); }

void write_summary_json(const fs::path& path, const RunSummary& s,
                        std::uint64_t rnd_checksum, bool has_rnd) {
  nlohmann::ordered_json j;
  j["variant"] = s.variant;
  j["terrain"] = s.terrain;
  j["seed"] = s.seed;
  j["iterations_completed"] = s.iterations_completed;
  j["aborted"] = s.aborted;
  j["eval_return"] = s.eval_return;
  j["pitch_rms"] = s.pitch_rms;
  j["acc_rms"] = s.acc_rms;
  j["torque_rms"] = s.torque_rms;
  j["joint_accel_rms"] = s.joint_accel_rms;
  j["action_diff_rms"] = s.action_diff_rms;
  j["mean_length"] = s.mean_length;
  if (has_rnd) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(rnd_checksum));
    j["rnd_target_checksum"] = buf;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("experiment: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

RunSummary run_experiment_in_dir(const TrainConfig& raw, std::uint64_t seed,
                                 const std::string& run_dir) {
  TrainConfig cfg = apply_variant(raw, raw.variant);
  WalkerConfig wc = cfg.env;
  wc.terrain = cfg.terrain;

  fs::create_directories(run_dir);
  save_config(cfg, (fs::path(run_dir) / "config.json").string());

  const int obs_dim = kObsDim;
  const int action_dim = kNumJoints;

  Rng policy_rng(seed, kStreamPolicyInit);
  Rng value_rng(seed, kStreamValueInit);
  Learner learner = make_learner(obs_dim, cfg.policy_hidden, cfg.value_hidden, action_dim,
                                 cfg.ppo.learning_rate, policy_rng, value_rng);

  const bool use_icm = cfg.intrinsic.eta_icm > 0.0;
  const bool use_rnd = cfg.intrinsic.eta_rnd > 0.0;
  const bool use_cnt = cfg.intrinsic.eta_cnt > 0.0;
  std::optional<IcmNets> icm;
  std::optional<RndNets> rnd;
  std::optional<DensityModel> density;
  std::uint64_t rnd_checksum = 0;
  if (use_icm) {
    Rng enc_rng(seed, kStreamIcmEncoderInit);
    Rng fwd_rng(seed, kStreamIcmForwardInit);
    Rng inv_rng(seed, kStreamIcmInverseInit);
    icm.emplace(make_icm(obs_dim, action_dim, cfg.intrinsic.eta_icm,
                         cfg.intrinsic.learning_rate, enc_rng, fwd_rng, inv_rng));
  }
  if (use_rnd) {
    Rng tgt_rng(seed, kStreamRndTargetInit);
    Rng pred_rng(seed, kStreamRndPredictorInit);
    rnd.emplace(make_rnd(obs_dim, cfg.intrinsic.eta_rnd, cfg.intrinsic.learning_rate,
                         tgt_rng, pred_rng));
    rnd_checksum = rnd_target_checksum(*rnd);
  }
  if (use_cnt) density.emplace(obs_dim, cfg.intrinsic.density_bins);
  IntrinsicNormalizer normalizer{RunningNormalizer(cfg.intrinsic.normalizer_clip),
                                 RunningNormalizer(cfg.intrinsic.normalizer_clip),
                                 RunningNormalizer(cfg.intrinsic.normalizer_clip)};

  Rng env_seed_rng(seed, kStreamEnvSeeds);
  std::vector<std::uint64_t> env_seeds(static_cast<std::size_t>(cfg.n_envs));
  for (auto& s : env_seeds) s = env_seed_rng.next_u64();
  VecEnv env(wc, env_seeds);

  Rng eval_seed_rng(seed, kStreamEvalSeeds);
  std::vector<std::uint64_t> eval_seeds(static_cast<std::size_t>(cfg.eval_episodes));
  for (auto& s : eval_seeds) s = eval_seed_rng.next_u64();

  Rng action_rng(seed, kStreamActions);
  Rng shuffle_rng(seed, kStreamShuffle);
  Rng smooth_rng(seed, kStreamSmoothness);

  EntropyScheduler scheduler(entropy_mode_from(cfg.entropy.mode),
                             entropy_schedule_from(cfg.entropy.schedule),
                             cfg.entropy.beta_max, cfg.entropy.beta_fixed, cfg.entropy.tau,
                             cfg.entropy.r_max);

  std::ofstream train_log(fs::path(run_dir) / "training_log.csv");
  std::ofstream episodes_log(fs::path(run_dir) / "episodes.csv");
  std::ofstream eval_log(fs::path(run_dir) / "eval.csv");
  if (!train_log || !episodes_log || !eval_log) {
    throw std::runtime_error("experiment: cannot open log files under " + run_dir);
  }
  train_log << "iteration,env_steps,episodes_completed,ep_return_mean,ep_len_mean,"
               "reward_mean,icm_mean,rnd_mean,cnt_mean,combined_mean,beta,sched_beta,"
               "sched_window_mean,sched_r_max,icm_fwd_loss,icm_inv_loss,rnd_loss,"
               "surrogate,value_loss,entropy,l_t,l_s,kl,clip_fraction,grad_norm,"
               "learning_rate,skipped_minibatches,total_loss\n";
  episodes_log << "iteration,env_index,episode_return,length,fell\n";
  eval_log << "iteration,eval_return,pitch_rms,acc_rms,torque_rms,joint_accel_rms,"
              "action_diff_rms,ang_vel_energy,mean_length,falls\n";

  RunSummary summary;
  summary.variant = cfg.variant;
  summary.terrain = terrain_kind_name(cfg.terrain.kind);
  summary.seed = seed;
  summary.dir = run_dir;

  // Last-known-good parameters: restored if an update drives anything
  // non-finite despite the per-minibatch guards.
  std::vector<double> good_policy = snapshot_params(policy_param_blocks(learner.policy));
  std::vector<double> good_value = snapshot_params(param_blocks(learner.value_net));
  int good_iteration = 0;

  EvalRow last_eval;
  bool have_eval = false;

  auto run_eval = [&](int iteration) {
    last_eval = evaluate(wc, learner.policy, eval_seeds);
    have_eval = true;
    eval_log << iteration << ',' << fmt(last_eval.eval_return) << ',' << fmt(last_eval.pitch)
             << ',' << fmt(last_eval.acc) << ',' << fmt(last_eval.torque) << ','
             << fmt(last_eval.jacc) << ',' << fmt(last_eval.adiff) << ','
             << fmt(last_eval.ang_vel) << ',' << fmt(last_eval.mean_length) << ','
             << last_eval.falls << '\n';
  };

  for (int iteration = 1; iteration <= cfg.iterations; ++iteration) {
    RolloutBatch batch = collect(learner.policy, learner.value_net, env, wc.horizon,
                                 action_rng);
    const int rows = batch.rows();

    // Intrinsic bonuses are computed with the models as they stand, then the
    // models train on a deterministic subsample of the same transitions.
    IcmLosses icm_losses;
    double rnd_loss = 0.0;
    if (use_icm) batch.r_icm = icm_reward(*icm, batch.obs, batch.actions, batch.next_obs);
    if (use_rnd) batch.r_rnd = rnd_reward(*rnd, batch.obs);
    if (use_cnt) {
      for (int i = 0; i < rows; ++i) {
        batch.r_cnt[i] = count_bonus_for(
            *density, std::span<const double>(batch.obs.row(i), obs_dim),
            cfg.intrinsic.eta_cnt);
      }
    }
    if (use_icm || use_rnd || use_cnt) {
      for (int i = 0; i < rows; ++i) {
        batch.r_combined[i] = combine_rewards(batch.rewards[i], batch.r_icm[i],
                                              batch.r_rnd[i], batch.r_cnt[i], normalizer);
      }
      const std::vector<int> sub = stride_indices(rows, cfg.intrinsic.train_samples);
      if (use_icm) {
        icm_losses = icm_train(*icm, gather_rows(batch.obs, sub),
                               gather_rows(batch.actions, sub),
                               gather_rows(batch.next_obs, sub));
      }
      if (use_rnd) rnd_loss = rnd_train(*rnd, gather_rows(batch.obs, sub));
    }

    AdvantageSet adv = gae_batch(batch, cfg.gamma, cfg.lambda_gae);
    normalize_advantages(adv.advantages);

    const double beta_used = scheduler.beta();
    UpdateStats stats = ppo_update(learner, batch, adv.advantages, adv.value_targets,
                                   beta_used, cfg.ppo, cfg.smooth, shuffle_rng, smooth_rng);

    // Scheduler consumes this iteration's completed returns after the update:
    // the resulting beta applies from the next iteration on.
    std::vector<double> episode_returns;
    episode_returns.reserve(batch.completed.size());
    double len_sum = 0.0;
    for (const EpisodeStats& ep : batch.completed) {
      episode_returns.push_back(ep.episode_return);
      len_sum += ep.length;
      episodes_log << iteration << ',' << ep.env_index << ',' << fmt(ep.episode_return)
                   << ',' << ep.length << ',' << (ep.fell ? 1 : 0) << '\n';
    }
    const double sched_beta = scheduler.update(episode_returns);

    const double ep_mean = mean_of(episode_returns);
    const double ep_len = batch.completed.empty()
                              ? kNan
                              : len_sum / static_cast<double>(batch.completed.size());
    train_log << iteration << ','
              << static_cast<long long>(iteration) * cfg.n_envs * wc.horizon << ','
              << batch.completed.size() << ',' << fmt(ep_mean) << ',' << fmt(ep_len) << ','
              << fmt(mean_of(batch.rewards)) << ',' << fmt(mean_of(batch.r_icm)) << ','
              << fmt(mean_of(batch.r_rnd)) << ',' << fmt(mean_of(batch.r_cnt)) << ','
              << fmt(mean_of(batch.r_combined)) << ',' << fmt(beta_used) << ','
              << fmt(sched_beta) << ',' << fmt(scheduler.window_mean()) << ','
              << fmt(scheduler.r_max()) << ',' << fmt(icm_losses.forward_loss) << ','
              << fmt(icm_losses.inverse_loss) << ',' << fmt(rnd_loss) << ','
              << fmt(stats.surrogate) << ',' << fmt(stats.value_loss) << ','
              << fmt(stats.entropy) << ',' << fmt(stats.l_t) << ',' << fmt(stats.l_s) << ','
              << fmt(stats.kl) << ',' << fmt(stats.clip_fraction) << ','
              << fmt(stats.grad_norm) << ',' << fmt(stats.learning_rate) << ','
              << stats.skipped_minibatches << ',' << fmt(stats.total_loss) << '\n';

    const bool finite = learner.policy.net.finite() && learner.value_net.finite() &&
                        std::isfinite(learner.policy.log_std[0]);
    if (!finite) {
      policy_param_blocks(learner.policy).from_flat(good_policy);
      param_blocks(learner.value_net).from_flat(good_value);
      summary.aborted = true;
      summary.iterations_completed = good_iteration;
      break;
    }
    good_policy = snapshot_params(policy_param_blocks(learner.policy));
    good_value = snapshot_params(param_blocks(learner.value_net));
    good_iteration = iteration;
    summary.iterations_completed = iteration;

    if (iteration == 1 || iteration % cfg.eval_every == 0 || iteration == cfg.iterations) {
      run_eval(iteration);
    }
  }

  if (!have_eval) run_eval(summary.iterations_completed);

  if (use_rnd && rnd_target_checksum(*rnd) != rnd_checksum) {
    throw std::logic_error("experiment: RND target parameters changed during the run");
  }

  Checkpoint ckpt;
  ckpt.add_tag("variant", cfg.variant);
  ckpt.add_tag("terrain", summary.terrain);
  ckpt.add_scalar("seed", static_cast<double>(seed));
  ckpt.add_scalar("iteration", static_cast<double>(summary.iterations_completed));
  add_mlp(ckpt, "policy", learner.policy.net);
  ckpt.add_vector("policy.log_std", learner.policy.log_std);
  add_mlp(ckpt, "value", learner.value_net);
  if (use_icm) {
    add_mlp(ckpt, "icm.encoder", icm->encoder);
    add_mlp(ckpt, "icm.forward", icm->forward_model);
    add_mlp(ckpt, "icm.inverse", icm->inverse_model);
  }
  if (use_rnd) {
    add_mlp(ckpt, "rnd.target", rnd->target);
    add_mlp(ckpt, "rnd.predictor", rnd->predictor);
  }
  ckpt.save(fs::path(run_dir) / "checkpoint.txt");

  summary.eval_return = last_eval.eval_return;
  summary.pitch_rms = last_eval.pitch;
  summary.acc_rms = last_eval.acc;
  summary.torque_rms = last_eval.torque;
  summary.joint_accel_rms = last_eval.jacc;
  summary.action_diff_rms = last_eval.adiff;
  summary.mean_length = last_eval.mean_length;
  write_summary_json(fs::path(run_dir) / "summary.json", summary, rnd_checksum, use_rnd);
  return summary;
}

RunSummary run_experiment(const TrainConfig& cfg, std::uint64_t seed) {
  const fs::path root = resolve_output_root(cfg);
  const std::string name = cfg.variant + "_" + terrain_kind_name(cfg.terrain.kind) +
                           "_seed" + std::to_string(seed);
  return run_experiment_in_dir(cfg, seed, (root / name).string());
}

std::vector<double> load_episode_returns(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / "episodes.csv").string();
  CsvTable table = read_csv(path);
  const int col = table.column("episode_return", path);
  std::vector<double> returns;
  returns.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) returns.push_back(table.number(i, col));
  return returns;
}

double best_eval_return(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / "eval.csv").string();
  CsvTable table = read_csv(path);
  const int col = table.column("eval_return", path);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.rows.size(); ++i) best = std::max(best, table.number(i, col));
  return best;
}

SuiteResult run_ablation_suite(const TrainConfig& base, const std::vector<std::string>& variants,
                               const std::vector<std::string>& terrains,
                               const std::vector<std::uint64_t>& seeds, int workers) {
  struct Job {
    TrainConfig cfg;
    std::uint64_t seed = 0;
  };
  std::vector<Job> jobs;
  for (const std::string& variant : variants) {
    for (const std::string& terrain : terrains) {
      for (std::uint64_t seed : seeds) {
        TrainConfig cfg = base;
        cfg.variant = variant;
        cfg.terrain.kind = terrain_kind_from_name(terrain);
        cfg.env.terrain = cfg.terrain;
        jobs.push_back({std::move(cfg), seed});
      }
    }
  }

  SuiteResult result;
  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      RunSummary summary;
      try {
        summary = run_experiment(job.cfg, job.seed);
      } catch (const std::exception& e) {
        // Partial failure: record the run as aborted with NaN metrics so the
        // report marks its cells as missing instead of dying.
        summary.variant = job.cfg.variant;
        summary.terrain = terrain_kind_name(job.cfg.terrain.kind);
        summary.seed = job.seed;
        summary.aborted = true;
        summary.eval_return = summary.pitch_rms = summary.acc_rms = kNan;
        summary.torque_rms = summary.joint_accel_rms = summary.action_diff_rms = kNan;
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "suite: run %s_%s_seed%llu failed: %s\n",
                     job.cfg.variant.c_str(),
                     terrain_kind_name(job.cfg.terrain.kind).c_str(),
                     static_cast<unsigned long long>(job.seed), e.what());
      }
      result.runs[i] = std::move(summary);
    }
  };
  int n_workers = workers > 0 ? workers
                              : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Steps-to-threshold target per terrain: 90% of the best mean evaluated
  // return reached by the PPO baseline (mean across seeds per eval point).
  std::map<std::string, double> r_star;
  for (const std::string& terrain : terrains) {
    std::map<int, std::pair<double, int>> by_iter;  // iteration -> (sum, n)
    for (const RunSummary& run : result.runs) {
      if (run.variant != "ppo" || run.terrain != terrain || run.aborted) continue;
      const std::string path = (fs::path(run.dir) / "eval.csv").string();
      CsvTable table = read_csv(path);
      const int it_col = table.column("iteration", path);
      const int ret_col = table.column("eval_return", path);
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        auto& cell = by_iter[static_cast<int>(table.number(i, it_col))];
        cell.first += table.number(i, ret_col);
        cell.second += 1;
      }
    }
    double best = kNan;
    for (const auto& [iter, cell] : by_iter) {
      const double mean = cell.first / cell.second;
      if (std::isnan(best) || mean > best) best = mean;
    }
    r_star[terrain] = std::isnan(best) ? kNan : 0.9 * best;
  }

  // Aggregate per (variant, terrain): seed means of the final metrics plus
  // steps-to-threshold in environment steps (episode index x horizon).
  for (const std::string& variant : variants) {
    RunRecord record;
    record.variant = variant;
    for (const std::string& terrain : terrains) {
      double sum_ret = 0, sum_pitch = 0, sum_acc = 0, sum_torque = 0;
      int n_ok = 0;
      double steps_sum = 0;
      int steps_n = 0;
      for (const RunSummary& run : result.runs) {
        if (run.variant != variant || run.terrain != terrain) continue;
        if (run.aborted) continue;
        sum_ret += run.eval_return;
        sum_pitch += run.pitch_rms;
        sum_acc += run.acc_rms;
        sum_torque += run.torque_rms;
        ++n_ok;
        if (!std::isnan(r_star[terrain])) {
          const std::vector<double> returns = load_episode_returns(run.dir);
          const std::optional<int> episodes =
              steps_to_threshold(returns, base.steps_window, r_star[terrain]);
          if (episodes.has_value()) {
            steps_sum += static_cast<double>(*episodes) * base.env.horizon;
            ++steps_n;
          }
        }
      }
      auto& cell = result.table[variant][terrain];
      cell[kMetricReward] = n_ok > 0 ? sum_ret / n_ok : kNan;
      cell[kMetricPitch] = n_ok > 0 ? sum_pitch / n_ok : kNan;
      cell[kMetricAcc] = n_ok > 0 ? sum_acc / n_ok : kNan;
      cell[kMetricTorque] = n_ok > 0 ? sum_torque / n_ok : kNan;
      cell[kMetricSteps] = steps_n > 0 ? steps_sum / steps_n : kNan;
      record.by_terrain[terrain] = cell;
    }
    result.records.push_back(std::move(record));
  }

  // Report files under <root>/suite/.
  const fs::path suite_dir = fs::path(resolve_output_root(base)) / "suite";
  fs::create_directories(suite_dir);
  {
    std::ofstream out(suite_dir / "ablation_metrics.csv");
    out << "variant,terrain,metric,value\n";
    for (const RunRecord& record : result.records) {
      for (const auto& [terrain, metrics] : record.by_terrain) {
        for (const auto& [metric, value] : metrics) {
          out << record.variant << ',' << terrain << ',' << metric << ',' << fmt(value)
              << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(suite_dir / "attribution_gains.csv");
    out << "table,row,metric,value\n";
    const RunRecord* full = nullptr;
    for (const RunRecord& record : result.records) {
      if (record.variant == "ecim") full = &record;
    }
    if (full != nullptr) {
      for (const RunRecord& record : result.records) {
        if (record.variant.rfind("ecim_minus_", 0) != 0) continue;
        const std::string row = record.variant.substr(std::string("ecim_minus_").size());
        for (const char* metric : kMetricNames) {
          out << "attribution," << row << ',' << metric << ','
              << fmt(attribution_gain(*full, record, metric)) << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(suite_dir / "cross_env_std.csv");
    out << "table,row,metric,value\n";
    for (const RunRecord& record : result.records) {
      for (const char* metric : kMetricNames) {
        out << "std," << record.variant << ',' << metric << ','
            << fmt(cross_env_std(record, metric)) << '\n';
      }
    }
  }
  {
    std::ofstream out(suite_dir / "runs_index.csv");
    out << "variant,terrain,seed,aborted,eval_return,pitch_rms,acc_rms,torque_rms,"
           "joint_accel_rms,action_diff_rms,dir\n";
    for (const RunSummary& run : result.runs) {
      out << run.variant << ',' << run.terrain << ',' << run.seed << ','
          << (run.aborted ? 1 : 0) << ',' << fmt(run.eval_return) << ','
          << fmt(run.pitch_rms) << ',' << fmt(run.acc_rms) << ',' << fmt(run.torque_rms)
          << ',' << fmt(run.joint_accel_rms) << ',' << fmt(run.action_diff_rms) << ','
          << run.dir << '\n';
    }
  }
  return result;
}

}  // namespace ecim
