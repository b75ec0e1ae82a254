#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "posefit/geometry.hpp"

namespace posefit {

// Uniform-grid exact nearest-neighbor index over a fixed point cloud.
// Queries expand cell shells outward and terminate once no farther cell can
// beat the current best, so results match brute force (distances exactly;
// among equidistant points either may be returned).
class NnGrid {
 public:
  explicit NnGrid(const PointCloud& points);

  // Returns (point index, squared distance).
  std::pair<int, double> nearest(const Vec3d& q) const;

  std::size_t size() const { return pts_.size(); }

 private:
  PointCloud pts_;
  Vec3d origin_{};
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::uint32_t> starts_;  // CSR over cells
  std::vector<std::uint32_t> items_;

  int cell_index(int ix, int iy, int iz) const {
    return (iz * ny_ + iy) * nx_ + ix;
  }
};

}  // namespace posefit
