#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecim/policy_opt.hpp"
#include "ecim/terrain.hpp"
#include "ecim/walker_env.hpp"

namespace ecim {

// Intrinsic-reward settings shared by the three bonus sources. An eta of
// zero disables that source entirely (no networks are queried or trained).
struct IntrinsicConfig {
  double eta_icm = 0.1;
  double eta_rnd = 0.1;
  double eta_cnt = 0.05;
  double learning_rate = 1e-3;
  int train_samples = 4096;  // per-iteration cap on predictor training rows
  int density_bins = 16;
  double normalizer_clip = 5.0;
};

// Entropy-coefficient schedule settings. When r_max is empty the reference
// scale is tracked automatically from the best window mean seen so far.
struct EntropyConfig {
  std::string mode = "adaptive";                 // adaptive | fixed
  std::string schedule = "return_proportional";  // return_proportional | return_complement
  double beta_max = 0.02;
  double beta_fixed = 0.01;
  int tau = 10;
  std::optional<double> r_max;  // empty means automatic tracking
};

// Full experiment configuration. Defaults reproduce the reference setup; a
// JSON file may override any subset, and unknown keys are rejected.
struct TrainConfig {
  TerrainConfig terrain;
  WalkerConfig env;

  int n_envs = 64;
  int iterations = 300;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string variant = "ecim";
  std::string output_dir = "runs";
  int eval_every = 10;
  int eval_episodes = 5;

  PpoCoeffs ppo;
  double gamma = 0.99;
  double lambda_gae = 0.95;
  std::vector<int> policy_hidden = {64, 64};
  std::vector<int> value_hidden = {64, 64};

  EntropyConfig entropy;
  SmoothCoeffs smooth;
  IntrinsicConfig intrinsic;

  int steps_window = 10;  // K consecutive episodes for the steps-to-threshold metric
  std::vector<std::string> ablate_terrains = {"flat",      "slope_up",    "rough",
                                              "stairs_up", "stairs_down", "stepping_stones"};
};

// Parse a JSON config file. Missing keys keep their defaults; unknown keys
// or type mismatches raise std::runtime_error naming the offending key.
TrainConfig load_config(const std::string& path);
TrainConfig parse_config_json(const std::string& text);

// Serialize the fully-resolved configuration (defaults materialized) so a
// run directory records exactly what it executed. Round-trips bit-exactly.
std::string config_to_json(const TrainConfig& cfg);
void save_config(const TrainConfig& cfg, const std::string& path);

// Apply a named ablation variant on top of a base configuration:
//   ppo                zeroes every addition (fixed entropy, no smoothness,
//                      no intrinsic bonuses)
//   ecim               leaves the configuration untouched
//   ecim_minus_aecpom  fixed entropy coefficient only
//   ecim_minus_mcrf    smoothness weights zeroed only
//   ecim_minus_imdeem  intrinsic bonus scales zeroed only
// Throws std::runtime_error for unrecognized names.
TrainConfig apply_variant(TrainConfig cfg, const std::string& variant);

// Root directory for run outputs: the ECIM_OUTPUT_ROOT environment variable
// when set, otherwise the configured output_dir.
std::string resolve_output_root(const TrainConfig& cfg);

}  // namespace ecim
