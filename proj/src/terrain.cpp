#include "ecim/terrain.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ecim {

namespace {

constexpr double kRiserBand = 0.05;  // traction drops within this distance of a stair riser
constexpr double kSlopeProbe = 0.25;

// floor-based remainder in [0, m) for any sign of x
double floor_mod(double x, double m) {
  return x - m * std::floor(x / m);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash of (seed, lattice index, channel) -> uniform double in [0, 1).
double cell_uniform(std::uint64_t seed, std::int64_t cell, std::uint64_t channel) {
  const std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(cell) + (channel << 32)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

// Seeded value noise: uniform lattice values in [-A, A] at multiples of the
// cell size, smoothstep-blended between neighbors.
double rough_height(const TerrainConfig& cfg, double x) {
  const double g = x / cfg.noise_cell;
  const double cell_f = std::floor(g);
  const auto cell = static_cast<std::int64_t>(cell_f);
  const double v0 = (2.0 * cell_uniform(cfg.noise_seed, cell, 0) - 1.0) * cfg.noise_amplitude;
  const double v1 = (2.0 * cell_uniform(cfg.noise_seed, cell + 1, 0) - 1.0) * cfg.noise_amplitude;
  const double u = smoothstep(g - cell_f);
  return v0 + (v1 - v0) * u;
}

}  // namespace

TerrainKind terrain_kind_from_name(const std::string& name) {
  if (name == "flat") return TerrainKind::kFlat;
  if (name == "slope_up") return TerrainKind::kSlopeUp;
  if (name == "slope_down") return TerrainKind::kSlopeDown;
  if (name == "rough") return TerrainKind::kRough;
  if (name == "stairs_up") return TerrainKind::kStairsUp;
  if (name == "stairs_down") return TerrainKind::kStairsDown;
  if (name == "stepping_stones") return TerrainKind::kSteppingStones;
  throw std::invalid_argument("unknown terrain kind: " + name);
}

std::string terrain_kind_name(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::kFlat: return "flat";
    case TerrainKind::kSlopeUp: return "slope_up";
    case TerrainKind::kSlopeDown: return "slope_down";
    case TerrainKind::kRough: return "rough";
    case TerrainKind::kStairsUp: return "stairs_up";
    case TerrainKind::kStairsDown: return "stairs_down";
    case TerrainKind::kSteppingStones: return "stepping_stones";
  }
  throw std::invalid_argument("unknown terrain kind enum value");
}

double terrain_height(const TerrainConfig& cfg, double x) {
  switch (cfg.kind) {
    case TerrainKind::kFlat:
      return 0.0;
    case TerrainKind::kSlopeUp:
      return cfg.slope * x;
    case TerrainKind::kSlopeDown:
      return -cfg.slope * x;
    case TerrainKind::kRough:
      return rough_height(cfg, x);
    case TerrainKind::kStairsUp:
      return cfg.stair_height * std::floor(x / cfg.stair_width);
    case TerrainKind::kStairsDown:
      return -cfg.stair_height * std::floor(x / cfg.stair_width);
    case TerrainKind::kSteppingStones: {
      const double xi = floor_mod(x, cfg.stone_spacing);
      return xi < cfg.stone_width ? 0.0 : -cfg.gap_depth;
    }
  }
  throw std::invalid_argument("unknown terrain kind enum value");
}

double terrain_traction(const TerrainConfig& cfg, double x) {
  switch (cfg.kind) {
    case TerrainKind::kFlat:
      return 1.0;
    case TerrainKind::kSlopeUp:
    case TerrainKind::kSlopeDown:
      return std::cos(std::atan(cfg.slope));
    case TerrainKind::kRough: {
      const auto cell = static_cast<std::int64_t>(std::floor(x / cfg.noise_cell));
      return 0.6 + 0.4 * cell_uniform(cfg.noise_seed, cell, 1);
    }
    case TerrainKind::kStairsUp:
    case TerrainKind::kStairsDown: {
      const double xi = floor_mod(x, cfg.stair_width);
      const bool near_riser = xi < kRiserBand || xi > cfg.stair_width - kRiserBand;
      return near_riser ? 0.25 : 1.0;
    }
    case TerrainKind::kSteppingStones: {
      const double xi = floor_mod(x, cfg.stone_spacing);
      return xi < cfg.stone_width ? 1.0 : 0.25;
    }
  }
  throw std::invalid_argument("unknown terrain kind enum value");
}

double terrain_slope_at(const TerrainConfig& cfg, double x) {
  return (terrain_height(cfg, x + kSlopeProbe) - terrain_height(cfg, x - kSlopeProbe)) /
         (2.0 * kSlopeProbe);
}

void export_heightfield(const TerrainConfig& cfg, double x0, double x1, double step,
                        const std::filesystem::path& csv_path) {
  if (step <= 0.0 || x1 < x0) throw std::invalid_argument("export_heightfield: bad range");
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("export_heightfield: cannot open " + csv_path.string());
  out << "x,height,traction,slope\n";
  char buf[128];
  for (double x = x0; x <= x1 + 1e-12; x += step) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g\n", x, terrain_height(cfg, x),
                  terrain_traction(cfg, x), terrain_slope_at(cfg, x));
    out << buf;
  }
}

}  // namespace ecim
