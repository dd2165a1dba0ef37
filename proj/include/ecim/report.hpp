#pragma once

#include <string>
#include <vector>

namespace ecim {

// One curve on a line chart: x/y pairs plus a legend label. NaN samples
// break the polyline instead of being drawn.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Writes a self-contained SVG line chart (axes, ticks, legend).
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

// Reads each run directory's summary.json and eval.csv, groups runs by
// terrain, and writes per-terrain reward / pitch / joint-acceleration /
// torque curve plots (seed-averaged, one curve per variant, legend entries
// equal to the variant names) plus the underlying CSVs and a run summary
// table into out_dir. An empty run list yields just the empty summary.
void emit_report(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace ecim
