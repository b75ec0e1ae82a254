#include "posefit/nn.hpp"

#include <algorithm>
#include <cmath>

#include "posefit/errors.hpp"

namespace posefit {

NnGrid::NnGrid(const PointCloud& points) : pts_(points) {
  if (pts_.empty()) throw DegenerateGeometryError("empty point cloud");
  Vec3d lo = pts_[0], hi = pts_[0];
  for (const auto& p : pts_) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  origin_ = lo;
  const Vec3d ext = hi - lo;
  const double diag = std::max({ext.x, ext.y, ext.z, 1e-9});
  // Aim for a handful of points per cell.
  const double target =
      diag / std::max(1.0, std::cbrt(static_cast<double>(pts_.size())));
  cell_ = std::max(target, 1e-9);
  nx_ = std::clamp(static_cast<int>(ext.x / cell_) + 1, 1, 64);
  ny_ = std::clamp(static_cast<int>(ext.y / cell_) + 1, 1, 64);
  nz_ = std::clamp(static_cast<int>(ext.z / cell_) + 1, 1, 64);
  // Recompute the cell size so the clamped grid still covers the bbox.
  cell_ = std::max({ext.x / nx_, ext.y / ny_, ext.z / nz_, cell_});

  const int ncells = nx_ * ny_ * nz_;
  std::vector<std::uint32_t> counts(ncells + 1, 0);
  auto locate = [&](const Vec3d& p, int& ix, int& iy, int& iz) {
    ix = std::clamp(static_cast<int>((p.x - origin_.x) / cell_), 0, nx_ - 1);
    iy = std::clamp(static_cast<int>((p.y - origin_.y) / cell_), 0, ny_ - 1);
    iz = std::clamp(static_cast<int>((p.z - origin_.z) / cell_), 0, nz_ - 1);
  };
  for (const auto& p : pts_) {
    int ix, iy, iz;
    locate(p, ix, iy, iz);
    ++counts[cell_index(ix, iy, iz) + 1];
  }
  for (int i = 1; i <= ncells; ++i) counts[i] += counts[i - 1];
  starts_ = counts;
  items_.resize(pts_.size());
  std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
  for (std::uint32_t i = 0; i < pts_.size(); ++i) {
    int ix, iy, iz;
    locate(pts_[i], ix, iy, iz);
    items_[cursor[cell_index(ix, iy, iz)]++] = i;
  }
}

std::pair<int, double> NnGrid::nearest(const Vec3d& q) const {
  const int qx = std::clamp(static_cast<int>((q.x - origin_.x) / cell_), 0,
                            nx_ - 1);
  const int qy = std::clamp(static_cast<int>((q.y - origin_.y) / cell_), 0,
                            ny_ - 1);
  const int qz = std::clamp(static_cast<int>((q.z - origin_.z) / cell_), 0,
                            nz_ - 1);

  int best = -1;
  double best_d2 = 1e300;
  auto scan_cell = [&](int ix, int iy, int iz) {
    const int ci = cell_index(ix, iy, iz);
    for (std::uint32_t k = starts_[ci]; k < starts_[ci + 1]; ++k) {
      const std::uint32_t idx = items_[k];
      const double d2 = squared_norm(pts_[idx] - q);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(idx);
      }
    }
  };

  const int rmax = std::max({nx_, ny_, nz_});
  for (int r = 0; r < rmax; ++r) {
    // Cells at Chebyshev ring r around the query cell.
    const int x0 = qx - r, x1 = qx + r;
    const int y0 = qy - r, y1 = qy + r;
    const int z0 = qz - r, z1 = qz + r;
    for (int iz = std::max(0, z0); iz <= std::min(nz_ - 1, z1); ++iz) {
      for (int iy = std::max(0, y0); iy <= std::min(ny_ - 1, y1); ++iy) {
        for (int ix = std::max(0, x0); ix <= std::min(nx_ - 1, x1); ++ix) {
          const bool on_ring = ix == x0 || ix == x1 || iy == y0 || iy == y1 ||
                               iz == z0 || iz == z1;
          if (!on_ring) continue;
          // Skip cells that cannot contain a closer point.
          const double bx = origin_.x + ix * cell_;
          const double by = origin_.y + iy * cell_;
          const double bz = origin_.z + iz * cell_;
          const double dx =
              q.x < bx ? bx - q.x : (q.x > bx + cell_ ? q.x - bx - cell_ : 0);
          const double dy =
              q.y < by ? by - q.y : (q.y > by + cell_ ? q.y - by - cell_ : 0);
          const double dz =
              q.z < bz ? bz - q.z : (q.z > bz + cell_ ? q.z - bz - cell_ : 0);
          if (dx * dx + dy * dy + dz * dz >= best_d2) continue;
          scan_cell(ix, iy, iz);
        }
      }
    }
    if (best >= 0) {
      // Distance from q to anything beyond the searched box; valid only when
      // q lies inside it.
      const double blo_x = origin_.x + (qx - r) * cell_;
      const double bhi_x = origin_.x + (qx + r + 1) * cell_;
      const double blo_y = origin_.y + (qy - r) * cell_;
      const double bhi_y = origin_.y + (qy + r + 1) * cell_;
      const double blo_z = origin_.z + (qz - r) * cell_;
      const double bhi_z = origin_.z + (qz + r + 1) * cell_;
      const double margin =
          std::min({q.x - blo_x, bhi_x - q.x, q.y - blo_y, bhi_y - q.y,
                    q.z - blo_z, bhi_z - q.z});
      if (margin > 0 && margin * margin >= best_d2) break;
    }
  }
  return {best, best_d2};
}

}  // namespace posefit
