// Command-line front end: train / ablate / report / fixtures / heightfield.
// Exit code 0 on success; on failure a single machine-readable JSON error
// line is printed to stderr and the exit code is nonzero.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecim/config.hpp"
#include "ecim/experiment.hpp"
#include "ecim/metrics.hpp"
#include "ecim/report.hpp"
#include "ecim/terrain.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

void print_error(const std::string& message) {
  nlohmann::json j;
  j["error"] = message;
  std::fprintf(stderr, "%s\n", j.dump().c_str());
}

int cmd_train(const std::string& config_path, const std::string& variant,
              std::uint64_t seed_flag, bool seed_set, const std::string& out_flag) {
  ecim::TrainConfig cfg = ecim::load_config(config_path);
  if (!variant.empty()) cfg.variant = variant;
  if (!out_flag.empty()) cfg.output_dir = out_flag;
  const std::uint64_t seed = seed_set ? seed_flag : cfg.seeds.front();
  const ecim::RunSummary summary = ecim::run_experiment(cfg, seed);
  std::printf("run_dir=%s\n", summary.dir.c_str());
  std::printf("iterations=%d aborted=%d\n", summary.iterations_completed,
              summary.aborted ? 1 : 0);
  std::printf("eval_return=%.6f pitch_rms=%.6f torque_rms=%.6f\n", summary.eval_return,
              summary.pitch_rms, summary.torque_rms);
  return summary.aborted ? 2 : 0;
}

int cmd_ablate(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
               std::vector<std::string> variants, std::vector<std::string> terrains,
               int workers, const std::string& out_flag) {
  ecim::TrainConfig cfg = ecim::load_config(config_path);
  if (!out_flag.empty()) cfg.output_dir = out_flag;
  if (variants.empty()) {
    variants.assign(ecim::kVariantNames.begin(), ecim::kVariantNames.end());
  }
  if (terrains.empty()) terrains = cfg.ablate_terrains;
  const std::vector<std::uint64_t>& use_seeds = seeds.empty() ? cfg.seeds : seeds;
  const ecim::SuiteResult result =
      ecim::run_ablation_suite(cfg, variants, terrains, use_seeds, workers);
  int failures = 0;
  for (const ecim::RunSummary& run : result.runs) {
    if (run.aborted) ++failures;
  }
  std::printf("runs=%zu failures=%d report=%s\n", result.runs.size(), failures,
              (fs::path(ecim::resolve_output_root(cfg)) / "suite").string().c_str());
  return failures == 0 ? 0 : 2;
}

int cmd_report(const std::vector<std::string>& runs, std::string out_dir) {
  if (out_dir.empty()) {
    const char* root = std::getenv("ECIM_OUTPUT_ROOT");
    out_dir = (root != nullptr && root[0] != '\0') ? (fs::path(root) / "report").string()
                                                   : std::string("report");
  }
  ecim::emit_report(runs, out_dir);
  std::printf("report_dir=%s\n", out_dir.c_str());
  return 0;
}

int cmd_fixtures(bool check, const std::string& metrics_csv, const std::string& expected_csv) {
  if (!check) {
    print_error("fixtures: pass --check to run the verification");
    return 2;
  }
  const std::vector<ecim::FixtureCell> cells =
      ecim::check_fixtures(metrics_csv, expected_csv);
  int failed = 0;
  for (const ecim::FixtureCell& cell : cells) {
    if (!cell.ok) ++failed;
    std::printf("%s %s/%s/%s expected=%.6f actual=%.6f\n", cell.ok ? "PASS" : "FAIL",
                cell.table.c_str(), cell.row.c_str(), cell.metric.c_str(), cell.expected,
                cell.actual);
  }
  std::printf("fixture_cells=%zu failed=%d\n", cells.size(), failed);
  return failed == 0 ? 0 : 2;
}

int cmd_heightfield(const std::string& terrain, double x0, double x1, double step,
                    const std::string& out_path) {
  ecim::TerrainConfig cfg;
  cfg.kind = ecim::terrain_kind_from_name(terrain);
  ecim::export_heightfield(cfg, x0, x1, step, out_path);
  std::printf("heightfield=%s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terrain-walker reinforcement-learning toolkit"};
  app.require_subcommand(1);

  std::string config_path, variant, out_dir;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> variants, terrains, runs;
  int workers = 0;

  CLI::App* train = app.add_subcommand("train", "Train one configuration");
  train->add_option("--config", config_path, "JSON config file")->required();
  train->add_option("--variant", variant, "Override the config's variant");
  CLI::Option* seed_opt = train->add_option("--seed", seed, "Override the run seed");
  train->add_option("--out", out_dir, "Output root (also: ECIM_OUTPUT_ROOT)");

  CLI::App* ablate = app.add_subcommand("ablate", "Run the ablation suite");
  ablate->add_option("--config", config_path, "JSON config file")->required();
  ablate->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
  ablate->add_option("--variants", variants, "Variants to run (default: all)")->delimiter(',');
  ablate->add_option("--terrains", terrains, "Terrains to run (default: config)")
      ->delimiter(',');
  ablate->add_option("--workers", workers, "Parallel runs (default: hardware)");
  ablate->add_option("--out", out_dir, "Output root (also: ECIM_OUTPUT_ROOT)");

  CLI::App* report = app.add_subcommand("report", "Aggregate runs into plots + CSVs");
  report->add_option("--runs", runs, "Run directories")->required()->expected(-1);
  report->add_option("--out", out_dir, "Report directory");

  bool check = false;
  std::string metrics_csv = "data/fixtures/variant_metrics.csv";
  std::string expected_csv = "data/fixtures/expected_aggregates.csv";
  CLI::App* fixtures = app.add_subcommand("fixtures", "Verify the published-table fixtures");
  fixtures->add_flag("--check", check, "Run the fixture verification");
  fixtures->add_option("--metrics", metrics_csv, "Per-terrain metrics CSV");
  fixtures->add_option("--expected", expected_csv, "Expected aggregate CSV");

  std::string terrain_name = "flat";
  double x0 = 0.0, x1 = 20.0, step = 0.05;
  std::string hf_out = "heightfield.csv";
  CLI::App* heightfield = app.add_subcommand("heightfield", "Export a terrain profile CSV");
  heightfield->add_option("--terrain", terrain_name, "Terrain kind name");
  heightfield->add_option("--x0", x0, "Start of the sampled range (m)");
  heightfield->add_option("--x1", x1, "End of the sampled range (m)");
  heightfield->add_option("--step", step, "Sample spacing (m)");
  heightfield->add_option("--out", hf_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    print_error(std::string("cli: ") + e.what());
    return 2;
  }

  try {
    if (train->parsed()) {
      return cmd_train(config_path, variant, seed, seed_opt->count() > 0, out_dir);
    }
    if (ablate->parsed()) {
      return cmd_ablate(config_path, seeds, variants, terrains, workers, out_dir);
    }
    if (report->parsed()) return cmd_report(runs, out_dir);
    if (fixtures->parsed()) return cmd_fixtures(check, metrics_csv, expected_csv);
    if (heightfield->parsed()) return cmd_heightfield(terrain_name, x0, x1, step, hf_out);
    print_error("cli: no subcommand");
    return 2;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
}
