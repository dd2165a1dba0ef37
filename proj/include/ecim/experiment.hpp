#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecim/config.hpp"
#include "ecim/metrics.hpp"
#include "ecim/rollout.hpp"

namespace ecim {

// Named RNG substreams. Every consumer of randomness draws from its own
// stream so that enabling or disabling one mechanism never shifts the draws
// seen by another — the property behind the bit-exact ablation identities.
enum Stream : std::uint64_t {
  kStreamPolicyInit = 1,
  kStreamValueInit = 2,
  kStreamIcmEncoderInit = 3,
  kStreamIcmForwardInit = 4,
  kStreamIcmInverseInit = 5,
  kStreamRndTargetInit = 6,
  kStreamRndPredictorInit = 7,
  kStreamActions = 8,
  kStreamShuffle = 9,
  kStreamSmoothness = 10,
  kStreamEnvSeeds = 11,
  kStreamEvalSeeds = 12,
};

// Final evaluation metrics of one run, averaged over eval episodes.
struct RunSummary {
  std::string variant;
  std::string terrain;
  std::uint64_t seed = 0;
  double eval_return = 0.0;
  double pitch_rms = 0.0;
  double acc_rms = 0.0;
  double torque_rms = 0.0;
  double joint_accel_rms = 0.0;
  double action_diff_rms = 0.0;
  double mean_length = 0.0;
  int iterations_completed = 0;
  bool aborted = false;  // non-finite parameters forced an early stop
  std::string dir;       // run directory holding the full logs
};

// Train one configuration to completion, writing training_log.csv,
// episodes.csv, eval.csv, config.json, checkpoint.txt and summary.json into
// <output_root>/<variant>_<terrain>_seed<seed>/. Returns the final metrics.
RunSummary run_experiment(const TrainConfig& cfg, std::uint64_t seed);

// As above but into an explicit directory (created if needed).
RunSummary run_experiment_in_dir(const TrainConfig& cfg, std::uint64_t seed,
                                 const std::string& run_dir);

// One aggregated table produced by the ablation suite.
struct SuiteResult {
  std::vector<RunSummary> runs;
  // variant -> terrain -> metric -> mean over seeds. Metric names follow
  // the metrics module constants plus "steps_to_rstar".
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> table;
  std::vector<RunRecord> records;  // per-variant per-terrain means, report-ready
};

// Run variants x terrains x seeds (thread pool across runs), aggregate seed
// means, compute steps-to-threshold against the PPO baseline, and write
// ablation_metrics.csv, attribution_gains.csv and cross_env_std.csv under
// <output_root>/suite/.
SuiteResult run_ablation_suite(const TrainConfig& base, const std::vector<std::string>& variants,
                               const std::vector<std::string>& terrains,
                               const std::vector<std::uint64_t>& seeds, int workers = 0);

// Recover per-episode returns (completion order) from a run's episodes.csv.
std::vector<double> load_episode_returns(const std::string& run_dir);

// Highest evaluated mean return across a run's eval rows (for thresholds).
double best_eval_return(const std::string& run_dir);

}  // namespace ecim
