#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace flores {

enum class TerrainKind { Flat, Slope, Stairs, Discrete, FrictionPatch };

TerrainKind terrain_kind_from_string(const std::string& s);
std::string to_string(TerrainKind kind);

struct TerrainParams {
  double size_x = 40.0;       // arena extent, m (centered on the origin)
  double size_y = 40.0;
  double resolution = 0.1;    // m per cell
  double slope_angle = deg2rad(10.0);   // slope kind
  double slope_direction = 0.0;         // gradient azimuth, rad
  double stair_riser = 0.10;            // stairs kind; must stay <= 0.15
  double stair_tread = 0.30;
  double stair_start_x = 1.0;           // first riser location
  int stair_count = 10;
  double block_size = 0.8;              // discrete kind: block footprint, m
  double block_height_max = 0.05;       // bounded block height
  double patch_size = 1.0;              // friction-patch kind
  Vec2 friction_range = Vec2(0.6, 2.0); // per-patch coefficient draw
};

// Immutable heightfield; safe to share read-only between environments.
class Terrain {
 public:
  Terrain(TerrainKind kind, TerrainParams params, uint64_t seed);

  TerrainKind kind() const { return kind_; }
  const TerrainParams& params() const { return params_; }
  uint64_t seed() const { return seed_; }

  int cells_x() const { return nx_; }
  int cells_y() const { return ny_; }
  double node_height(int ix, int iy) const { return heights_[index(ix, iy)]; }
  double cell_friction(int ix, int iy) const { return friction_[index(ix, iy)]; }

  // bilinear interpolation; (x, y) outside the arena clamps to the border
  double height_at(double x, double y, bool* clamped = nullptr) const;
  // outward unit normal of the interpolated surface
  Vec3 normal_at(double x, double y) const;
  double friction_at(double x, double y) const;
  bool inside(double x, double y) const;

  // heightfield CSV: x-index, y-index, height, friction
  void export_csv(const std::string& path) const;

 private:
  int index(int ix, int iy) const { return iy * nx_ + ix; }
  void clamp_to_grid(double x, double y, double& gx, double& gy, bool* clamped) const;

  TerrainKind kind_;
  TerrainParams params_;
  uint64_t seed_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> heights_;
  std::vector<double> friction_;
};

std::shared_ptr<const Terrain> make_terrain(TerrainKind kind, const TerrainParams& params,
                                            uint64_t seed);

}  // namespace flores
