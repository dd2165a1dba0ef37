#include "ecim/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecim {

const std::array<const char*, 5> kMetricNames = {kMetricReward, kMetricSteps, kMetricPitch,
                                                 kMetricAcc, kMetricTorque};
const std::array<const char*, 5> kVariantNames = {"ppo", "ecim", "ecim_minus_aecpom",
                                                  "ecim_minus_mcrf", "ecim_minus_imdeem"};

double episode_return(std::span<const double> rewards) {
  double total = 0.0;
  for (double r : rewards) total += r;
  return total;
}

double ang_vel_energy(const EpisodeTrace& trace) {
  double total = 0.0;
  for (const auto& w : trace.omega) total += w[0] * w[0] + w[1] * w[1];
  return total;
}

std::vector<std::vector<double>> joint_accel(const EpisodeTrace& trace) {
  std::vector<std::vector<double>> accel;
  if (trace.joint_vel.size() < 2) return accel;
  accel.reserve(trace.joint_vel.size() - 1);
  for (std::size_t t = 1; t < trace.joint_vel.size(); ++t) {
    const auto& prev = trace.joint_vel[t - 1];
    const auto& cur = trace.joint_vel[t];
    std::vector<double> a(cur.size());
    for (std::size_t j = 0; j < cur.size(); ++j) a[j] = (cur[j] - prev[j]) / trace.dt;
    accel.push_back(std::move(a));
  }
  return accel;
}

double pitch_rms(const EpisodeTrace& trace) {
  if (trace.theta.empty()) throw std::invalid_argument("pitch_rms: empty trace");
  double total = 0.0;
  for (double th : trace.theta) total += th * th;
  return std::sqrt(total / static_cast<double>(trace.theta.size()));
}

double acc_rms(const EpisodeTrace& trace) {
  if (trace.body_accel.empty()) throw std::invalid_argument("acc_rms: empty trace");
  double total = 0.0;
  for (const auto& a : trace.body_accel) total += a[0] * a[0] + a[1] * a[1];
  return std::sqrt(total / static_cast<double>(trace.body_accel.size()));
}

double torque_rms(const EpisodeTrace& trace) {
  if (trace.torque.empty() || trace.torque.front().empty()) {
    throw std::invalid_argument("torque_rms: empty trace");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& row : trace.torque) {
    for (double tau : row) {
      total += tau * tau;
      ++count;
    }
  }
  return std::sqrt(total / static_cast<double>(count));
}

double joint_accel_rms(const EpisodeTrace& trace) {
  const auto accel = joint_accel(trace);
  if (accel.empty()) return 0.0;
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& row : accel) {
    for (double a : row) {
      total += a * a;
      ++count;
    }
  }
  return std::sqrt(total / static_cast<double>(count));
}

double action_diff_rms(const EpisodeTrace& trace) {
  if (trace.actions.size() < 2) return 0.0;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 1; t < trace.actions.size(); ++t) {
    const auto& prev = trace.actions[t - 1];
    const auto& cur = trace.actions[t];
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double d = cur[j] - prev[j];
      total += d * d;
      ++count;
    }
  }
  return std::sqrt(total / static_cast<double>(count));
}

std::optional<int> steps_to_threshold(std::span<const double> episode_returns, int k,
                                      double r_star) {
  if (k < 1) throw std::invalid_argument("steps_to_threshold: K must be >= 1");
  const int n = static_cast<int>(episode_returns.size());
  double window_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    window_sum += episode_returns[i];
    if (i >= k) window_sum -= episode_returns[i - k];
    if (i >= k - 1 && window_sum / k >= r_star) return i + 1;
  }
  return std::nullopt;
}

double attribution_gain(const RunRecord& full, const RunRecord& ablated,
                        const std::string& metric) {
  if (full.by_terrain.size() != ablated.by_terrain.size() || full.by_terrain.empty()) {
    throw std::invalid_argument("attribution_gain: terrain sets differ");
  }
  double total = 0.0;
  for (const auto& [terrain, metrics] : full.by_terrain) {
    const auto other = ablated.by_terrain.find(terrain);
    if (other == ablated.by_terrain.end()) {
      throw std::invalid_argument("attribution_gain: terrain " + terrain + " missing in ablated record");
    }
    total += metrics.at(metric) - other->second.at(metric);
  }
  return total / static_cast<double>(full.by_terrain.size());
}

double cross_env_std(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("cross_env_std: need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

double cross_env_std(const RunRecord& record, const std::string& metric) {
  std::vector<double> values;
  values.reserve(record.by_terrain.size());
  for (const auto& [terrain, metrics] : record.by_terrain) values.push_back(metrics.at(metric));
  return cross_env_std(values);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

std::vector<RunRecord> load_run_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics table: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "variant,terrain,metric,value") {
    throw std::runtime_error("unexpected header in " + path);
  }
  std::map<std::string, RunRecord> by_variant;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw std::runtime_error("bad row in " + path + ": " + line);
    RunRecord& rec = by_variant[fields[0]];
    rec.variant = fields[0];
    rec.by_terrain[fields[1]][fields[2]] = std::stod(fields[3]);
  }
  std::vector<RunRecord> records;
  records.reserve(by_variant.size());
  for (auto& [name, rec] : by_variant) records.push_back(std::move(rec));
  return records;
}

std::vector<FixtureCell> check_fixtures(const std::string& metrics_csv,
                                        const std::string& expected_csv) {
  constexpr double kTol = 1e-4;
  const auto records = load_run_records_csv(metrics_csv);
  auto find_record = [&](const std::string& name) -> const RunRecord& {
    for (const auto& r : records) {
      if (r.variant == name) return r;
    }
    throw std::runtime_error("fixture table missing variant: " + name);
  };
  const RunRecord& full = find_record("ecim");

  std::ifstream in(expected_csv);
  if (!in) throw std::runtime_error("cannot open expected aggregates: " + expected_csv);
  std::string line;
  if (!std::getline(in, line) || line != "table,row,metric,expected") {
    throw std::runtime_error("unexpected header in " + expected_csv);
  }
  std::vector<FixtureCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw std::runtime_error("bad row in " + expected_csv + ": " + line);
    FixtureCell cell;
    cell.table = fields[0];
    cell.row = fields[1];
    cell.metric = fields[2];
    cell.expected = std::stod(fields[3]);
    if (cell.table == "attribution") {
      // row names the removed module; the ablated variant is ecim_minus_<row>
      cell.actual = attribution_gain(full, find_record("ecim_minus_" + cell.row), cell.metric);
    } else if (cell.table == "std") {
      cell.actual = cross_env_std(find_record(cell.row), cell.metric);
    } else {
      throw std::runtime_error("unknown fixture table kind: " + cell.table);
    }
    cell.ok = std::abs(cell.actual - cell.expected) <= kTol;
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace ecim
