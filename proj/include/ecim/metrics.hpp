#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecim {

// Per-step evaluation signals of one episode.
struct EpisodeTrace {
  std::vector<double> theta;                      // pitch (rad)
  std::vector<std::array<double, 3>> omega;       // (roll, pitch, yaw) rates
  std::vector<std::vector<double>> joint_vel;     // qdot per step
  std::vector<std::vector<double>> torque;        // per step, J entries
  std::vector<std::array<double, 2>> body_accel;  // per step
  std::vector<std::vector<double>> actions;       // commanded actions per step
  std::vector<double> rewards;
  double dt = 0.02;
};

// R = sum of rewards.
double episode_return(std::span<const double> rewards);

// Sum over steps of omega_x^2 + omega_y^2 (yaw excluded).
double ang_vel_energy(const EpisodeTrace& trace);

// a_t = (qdot_t - qdot_{t-1}) / dt, length T-1 (empty for T < 2).
std::vector<std::vector<double>> joint_accel(const EpisodeTrace& trace);

// sqrt(mean theta_t^2)
double pitch_rms(const EpisodeTrace& trace);

// sqrt(mean ||a_t||^2) over body accelerations
double acc_rms(const EpisodeTrace& trace);

// sqrt(mean over steps AND joints of tau^2)
double torque_rms(const EpisodeTrace& trace);

// RMS over the T-1 joint-acceleration vectors and joints jointly.
double joint_accel_rms(const EpisodeTrace& trace);

// RMS over steps/joints of consecutive action differences (a_t - a_{t-1}).
double action_diff_rms(const EpisodeTrace& trace);

// Smallest 1-based episode index N >= K whose trailing-K mean return reaches
// the threshold; nullopt if never.
std::optional<int> steps_to_threshold(std::span<const double> episode_returns, int k,
                                      double r_star);

inline constexpr const char* kMetricReward = "reward";
inline constexpr const char* kMetricSteps = "steps_to_rstar";
inline constexpr const char* kMetricPitch = "pitch_rms";
inline constexpr const char* kMetricAcc = "acc_rms";
inline constexpr const char* kMetricTorque = "torque_rms";

extern const std::array<const char*, 5> kMetricNames;
extern const std::array<const char*, 5> kVariantNames;  // ppo, ecim, minus_*

// variant -> { terrain -> { metric -> value } }, the shape of the per-variant
// result tables that the attribution and std aggregates consume.
struct RunRecord {
  std::string variant;
  std::map<std::string, std::map<std::string, double>> by_terrain;
};

// AG = mean over terrains of (full - ablated) for one metric. Both records
// must cover the same terrain set.
double attribution_gain(const RunRecord& full, const RunRecord& ablated,
                        const std::string& metric);

// Population standard deviation (divisor E).
double cross_env_std(std::span<const double> values);

// Std over a record's terrains for one metric.
double cross_env_std(const RunRecord& record, const std::string& metric);

// Loads data/fixtures/variant_metrics.csv (variant,terrain,metric,value).
std::vector<RunRecord> load_run_records_csv(const std::string& path);

struct FixtureCell {
  std::string table;   // "attribution" or "std"
  std::string row;     // module or variant name
  std::string metric;
  double expected = 0.0;
  double actual = 0.0;
  bool ok = false;
};

// Recomputes every aggregate cell from the per-terrain reference table and
// compares against the expected-aggregates file at tolerance 1e-4.
std::vector<FixtureCell> check_fixtures(const std::string& metrics_csv,
                                        const std::string& expected_csv);

}  // namespace ecim
