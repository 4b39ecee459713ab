#include "core/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace flores {

TerrainKind terrain_kind_from_string(const std::string& s) {
  if (s == "flat") return TerrainKind::Flat;
  if (s == "slope") return TerrainKind::Slope;
  if (s == "stairs") return TerrainKind::Stairs;
  if (s == "discrete") return TerrainKind::Discrete;
  if (s == "friction-patch" || s == "friction_patch") return TerrainKind::FrictionPatch;
  throw_invalid("unknown terrain kind: " + s);
}

std::string to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::Flat: return "flat";
    case TerrainKind::Slope: return "slope";
    case TerrainKind::Stairs: return "stairs";
    case TerrainKind::Discrete: return "discrete";
    case TerrainKind::FrictionPatch: return "friction-patch";
  }
  return "flat";
}

Terrain::Terrain(TerrainKind kind, TerrainParams params, uint64_t seed)
    : kind_(kind), params_(params), seed_(seed) {
  if (params_.resolution <= 0.0 || params_.size_x <= 0.0 || params_.size_y <= 0.0)
    throw_invalid("terrain: size and resolution must be positive");
  if (kind == TerrainKind::Stairs && params_.stair_riser > 0.15)
    throw_invalid("terrain: stair riser height must not exceed 0.15 m");
  if (params_.friction_range[0] <= 0.0 || params_.friction_range[1] < params_.friction_range[0])
    throw_invalid("terrain: friction range must be positive and ordered");

  nx_ = static_cast<int>(std::lround(params_.size_x / params_.resolution)) + 1;
  ny_ = static_cast<int>(std::lround(params_.size_y / params_.resolution)) + 1;
  heights_.assign(static_cast<size_t>(nx_) * ny_, 0.0);
  friction_.assign(static_cast<size_t>(nx_) * ny_, 1.0);

  Rng rng(derive_seed(seed, "terrain"));
  const double x0 = -0.5 * params_.size_x;
  const double y0 = -0.5 * params_.size_y;

  switch (kind) {
    case TerrainKind::Flat:
      break;
    case TerrainKind::Slope: {
      const double gx = std::cos(params_.slope_direction);
      const double gy = std::sin(params_.slope_direction);
      const double t = std::tan(params_.slope_angle);
      for (int iy = 0; iy < ny_; ++iy)
        for (int ix = 0; ix < nx_; ++ix) {
          const double x = x0 + ix * params_.resolution;
          const double y = y0 + iy * params_.resolution;
          heights_[index(ix, iy)] = t * (x * gx + y * gy);
        }
      break;
    }
    case TerrainKind::Stairs: {
      // h(x) = riser * floor((x - start)/tread), so the first elevation change
      // sits one tread past stair_start_x; riser edges land on grid nodes when
      // the tread is a multiple of the resolution
      for (int iy = 0; iy < ny_; ++iy)
        for (int ix = 0; ix < nx_; ++ix) {
          const double x = x0 + ix * params_.resolution;
          double h = 0.0;
          if (x >= params_.stair_start_x) {
            double step = std::floor((x - params_.stair_start_x) / params_.stair_tread + 1e-9);
            step = std::clamp(step, 0.0, static_cast<double>(params_.stair_count));
            h = params_.stair_riser * step;
          }
          heights_[index(ix, iy)] = h;
        }
      break;
    }
    case TerrainKind::Discrete: {
      const int cells_per_block =
          std::max(1, static_cast<int>(std::lround(params_.block_size / params_.resolution)));
      const int bx = nx_ / cells_per_block + 1;
      const int by = ny_ / cells_per_block + 1;
      std::vector<double> block(static_cast<size_t>(bx) * by);
      for (auto& h : block) h = rng.uniform(0.0, params_.block_height_max);
      for (int iy = 0; iy < ny_; ++iy)
        for (int ix = 0; ix < nx_; ++ix)
          heights_[index(ix, iy)] =
              block[static_cast<size_t>(iy / cells_per_block) * bx + ix / cells_per_block];
      break;
    }
    case TerrainKind::FrictionPatch: {
      const int cells_per_patch =
          std::max(1, static_cast<int>(std::lround(params_.patch_size / params_.resolution)));
      const int px = nx_ / cells_per_patch + 1;
      const int py = ny_ / cells_per_patch + 1;
      std::vector<double> patch(static_cast<size_t>(px) * py);
      for (auto& f : patch)
        f = rng.uniform(params_.friction_range[0], params_.friction_range[1]);
      for (int iy = 0; iy < ny_; ++iy)
        for (int ix = 0; ix < nx_; ++ix)
          friction_[index(ix, iy)] =
              patch[static_cast<size_t>(iy / cells_per_patch) * px + ix / cells_per_patch];
      break;
    }
  }
}

bool Terrain::inside(double x, double y) const {
  return x >= -0.5 * params_.size_x && x <= 0.5 * params_.size_x && y >= -0.5 * params_.size_y &&
         y <= 0.5 * params_.size_y;
}

void Terrain::clamp_to_grid(double x, double y, double& gx, double& gy, bool* clamped) const {
  gx = (x + 0.5 * params_.size_x) / params_.resolution;
  gy = (y + 0.5 * params_.size_y) / params_.resolution;
  bool c = false;
  if (gx < 0.0) { gx = 0.0; c = true; }
  if (gy < 0.0) { gy = 0.0; c = true; }
  if (gx > nx_ - 1.0) { gx = nx_ - 1.0; c = true; }
  if (gy > ny_ - 1.0) { gy = ny_ - 1.0; c = true; }
  if (clamped) *clamped = c;
}

double Terrain::height_at(double x, double y, bool* clamped) const {
  double gx, gy;
  clamp_to_grid(x, y, gx, gy, clamped);
  const int ix = std::min(static_cast<int>(gx), nx_ - 2);
  const int iy = std::min(static_cast<int>(gy), ny_ - 2);
  const double fx = gx - ix;
  const double fy = gy - iy;
  const double h00 = heights_[index(ix, iy)];
  const double h10 = heights_[index(ix + 1, iy)];
  const double h01 = heights_[index(ix, iy + 1)];
  const double h11 = heights_[index(ix + 1, iy + 1)];
  return h00 * (1 - fx) * (1 - fy) + h10 * fx * (1 - fy) + h01 * (1 - fx) * fy + h11 * fx * fy;
}

Vec3 Terrain::normal_at(double x, double y) const {
  double gx, gy;
  clamp_to_grid(x, y, gx, gy, nullptr);
  const int ix = std::min(static_cast<int>(gx), nx_ - 2);
  const int iy = std::min(static_cast<int>(gy), ny_ - 2);
  const double fx = gx - ix;
  const double fy = gy - iy;
  const double h00 = heights_[index(ix, iy)];
  const double h10 = heights_[index(ix + 1, iy)];
  const double h01 = heights_[index(ix, iy + 1)];
  const double h11 = heights_[index(ix + 1, iy + 1)];
  const double inv = 1.0 / params_.resolution;
  const double dhdx = ((h10 - h00) * (1 - fy) + (h11 - h01) * fy) * inv;
  const double dhdy = ((h01 - h00) * (1 - fx) + (h11 - h10) * fx) * inv;
  return Vec3(-dhdx, -dhdy, 1.0).normalized();
}

double Terrain::friction_at(double x, double y) const {
  double gx, gy;
  clamp_to_grid(x, y, gx, gy, nullptr);
  const int ix = std::min(static_cast<int>(std::lround(gx)), nx_ - 1);
  const int iy = std::min(static_cast<int>(std::lround(gy)), ny_ - 1);
  return friction_[index(ix, iy)];
}

void Terrain::export_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw_io("cannot open terrain CSV for writing: " + path);
  out << "x_index,y_index,height,friction\n";
  char line[128];
  for (int iy = 0; iy < ny_; ++iy)
    for (int ix = 0; ix < nx_; ++ix) {
      std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g\n", ix, iy, heights_[index(ix, iy)],
                    friction_[index(ix, iy)]);
      out << line;
    }
}

std::shared_ptr<const Terrain> make_terrain(TerrainKind kind, const TerrainParams& params,
                                            uint64_t seed) {
  return std::make_shared<const Terrain>(kind, params, seed);
}

}  // namespace flores
