#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace ecim {

enum class TerrainKind {
  kFlat,
  kSlopeUp,
  kSlopeDown,
  kRough,
  kStairsUp,
  kStairsDown,
  kSteppingStones,
};

TerrainKind terrain_kind_from_name(const std::string& name);
std::string terrain_kind_name(TerrainKind kind);

// Geometry and traction parameters for one terrain. All heights/lengths in
// meters. The noise seed fixes the Rough profile, so a config reproduces the
// exact same ground on every run.
struct TerrainConfig {
  TerrainKind kind = TerrainKind::kFlat;
  double slope = 0.2;             // grade of SlopeUp/SlopeDown
  double noise_amplitude = 0.15;  // Rough: lattice values ~ U(-A, A)
  double noise_cell = 0.5;        // Rough: lattice spacing
  double stair_height = 0.1;
  double stair_width = 0.5;
  double stone_spacing = 0.9;     // SteppingStones: cell period
  double stone_width = 0.5;       // stone occupies [0, stone_width) of a cell
  double gap_depth = 0.4;
  std::uint64_t noise_seed = 1000;
};

// Ground height at x. Pure: depends only on (config, x).
double terrain_height(const TerrainConfig& cfg, double x);

// Ground-contact quality in (0, 1]: 1 on flat and on stair treads / stone
// tops, cos(atan(slope)) on slopes, a seeded per-cell factor in [0.6, 1] on
// rough ground, and 0.25 inside gap/riser bands (within kRiserBand of a stair
// boundary, or anywhere in a stone gap).
double terrain_traction(const TerrainConfig& cfg, double x);

// Local grade via central differences: (h(x+d) - h(x-d)) / (2d), d = 0.25 m.
// Exact on slopes; smooths stair edges over a half-meter window.
double terrain_slope_at(const TerrainConfig& cfg, double x);

// Writes rows of (x, height, traction, slope) over [x0, x1] at `step` spacing.
void export_heightfield(const TerrainConfig& cfg, double x0, double x1, double step,
                        const std::filesystem::path& csv_path);

}  // namespace ecim
