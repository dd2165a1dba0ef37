#include "ecim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "ecim/csv.hpp"
#include "json.hpp"

namespace ecim {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Short fixed-precision labels for axis ticks.
std::string tick_label(double v) {
  char buf[40];
  const double a = std::fabs(v);
  if (v == 0.0) return "0";
  if (a >= 1000.0 || a < 0.01) {
    std::snprintf(buf, sizeof(buf), "%.2g", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.3g", v);
  }
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct RunInfo {
  std::string dir;
  std::string variant;
  std::string terrain;
  std::uint64_t seed = 0;
  nlohmann::json summary;
};

RunInfo load_run_info(const std::string& dir) {
  const fs::path path = fs::path(dir) / "summary.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot open " + path.string());
  RunInfo info;
  info.dir = dir;
  try {
    in >> info.summary;
    info.variant = info.summary.at("variant").get<std::string>();
    info.terrain = info.summary.at("terrain").get<std::string>();
    info.seed = info.summary.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("report: bad summary in " + path.string() + ": " + e.what());
  }
  return info;
}

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
  const double width = 860, height = 520;
  const double left = 80, right = 200, top = 50, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double xmin = kNan, xmax = kNan, ymin = kNan, ymax = kNan;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (std::isnan(xmin) || s.x[i] < xmin) xmin = s.x[i];
      if (std::isnan(xmax) || s.x[i] > xmax) xmax = s.x[i];
      if (std::isnan(ymin) || s.y[i] < ymin) ymin = s.y[i];
      if (std::isnan(ymax) || s.y[i] > ymax) ymax = s.y[i];
    }
  }
  if (std::isnan(xmin)) {
    xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  // A little vertical headroom so curves don't hug the frame.
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (left + plot_w / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-size=\"17\">" << title << "</text>\n";

  // Frame and grid with five ticks per axis.
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / ticks;
    const double fy = ymin + (ymax - ymin) * i / ticks;
    const double px = sx(fx), py = sy(fy);
    out << "<line x1=\"" << px << "\" y1=\"" << top << "\" x2=\"" << px << "\" y2=\""
        << (top + plot_h) << "\" stroke=\"#ddd\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << py << "\" x2=\"" << (left + plot_w)
        << "\" y2=\"" << py << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << (top + plot_h + 18)
        << "\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
    out << "<text x=\"" << (left - 8) << "\" y=\"" << (py + 4)
        << "\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
  }
  out << "<text x=\"" << (left + plot_w / 2) << "\" y=\"" << (height - 14)
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"22\" y=\"" << (top + plot_h / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 22 " << (top + plot_h / 2) << ")\">" << y_label
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    // NaN samples split the curve into separate polyline segments.
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) {
        flush();
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(series[s].x[i]), sy(series[s].y[i]));
      points += buf;
    }
    flush();
    // Legend swatch + label.
    const double ly = top + 10 + 22 * static_cast<double>(s);
    out << "<line x1=\"" << (left + plot_w + 14) << "\" y1=\"" << ly << "\" x2=\""
        << (left + plot_w + 42) << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2.5\"/>\n";
    out << "<text x=\"" << (left + plot_w + 48) << "\" y=\"" << (ly + 4) << "\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  fs::create_directories(out_dir);

  std::vector<RunInfo> runs;
  runs.reserve(run_dirs.size());
  for (const std::string& dir : run_dirs) runs.push_back(load_run_info(dir));

  // Final-metrics summary table (written even when empty).
  {
    std::ofstream out(fs::path(out_dir) / "report_summary.csv");
    out << "variant,terrain,seed,eval_return,pitch_rms,acc_rms,torque_rms,"
           "joint_accel_rms,action_diff_rms\n";
    for (const RunInfo& run : runs) {
      out << run.variant << ',' << run.terrain << ',' << run.seed;
      for (const char* key : {"eval_return", "pitch_rms", "acc_rms", "torque_rms",
                              "joint_accel_rms", "action_diff_rms"}) {
        out << ',' << fmt(run.summary.value(key, kNan));
      }
      out << '\n';
    }
  }
  if (runs.empty()) return;

  struct PlotSpec {
    const char* column;  // eval.csv column
    const char* stem;    // output file stem
    const char* label;   // y-axis label
  };
  const PlotSpec plots[] = {
      {"eval_return", "reward", "evaluated return"},
      {"pitch_rms", "pitch", "pitch RMS (rad)"},
      {"joint_accel_rms", "joint_accel", "joint acceleration RMS (rad/s^2)"},
      {"torque_rms", "torque", "torque RMS"},
  };

  std::set<std::string> terrains;
  for (const RunInfo& run : runs) terrains.insert(run.terrain);

  for (const std::string& terrain : terrains) {
    // variant -> iteration -> (sum, count) for seed averaging.
    std::map<std::string, std::map<int, std::pair<double, int>>> curves[4];
    std::vector<std::string> variant_order;
    for (const RunInfo& run : runs) {
      if (run.terrain != terrain) continue;
      if (std::find(variant_order.begin(), variant_order.end(), run.variant) ==
          variant_order.end()) {
        variant_order.push_back(run.variant);
      }
      const std::string path = (fs::path(run.dir) / "eval.csv").string();
      const CsvTable table = read_csv(path);
      const int it_col = table.column("iteration", path);
      for (std::size_t p = 0; p < 4; ++p) {
        const int col = table.column(plots[p].column, path);
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
          auto& cell = curves[p][run.variant][static_cast<int>(table.number(i, it_col))];
          cell.first += table.number(i, col);
          cell.second += 1;
        }
      }
    }

    for (std::size_t p = 0; p < 4; ++p) {
      std::vector<Series> series;
      std::set<int> iteration_set;
      for (const std::string& variant : variant_order) {
        Series s;
        s.label = variant;
        for (const auto& [iteration, cell] : curves[p][variant]) {
          s.x.push_back(iteration);
          s.y.push_back(cell.first / cell.second);
          iteration_set.insert(iteration);
        }
        series.push_back(std::move(s));
      }
      const std::string stem =
          std::string(plots[p].stem) + "_" + terrain;
      write_svg_chart((fs::path(out_dir) / (stem + ".svg")).string(),
                      std::string(plots[p].label) + " on " + terrain, "iteration",
                      plots[p].label, series);

      // Underlying data: one column per variant, NaN where a variant has no
      // sample at that iteration.
      std::ofstream out(fs::path(out_dir) / (stem + ".csv"));
      out << "iteration";
      for (const std::string& variant : variant_order) out << ',' << variant;
      out << '\n';
      for (int iteration : iteration_set) {
        out << iteration;
        for (const std::string& variant : variant_order) {
          const auto& curve = curves[p][variant];
          const auto it = curve.find(iteration);
          out << ',' << (it == curve.end() ? "nan" : fmt(it->second.first / it->second.second));
        }
        out << '\n';
      }
    }
  }
}

}  // namespace ecim
