#pragma once

#include <array>
#include <string>
#include <vector>

#include "posefit/vec.hpp"

namespace posefit {

// Triangle mesh in the object frame. Vertices in meters, per-vertex RGB
// colors in [0,1]. `diameter` caches the maximum pairwise vertex distance.
struct TriangleMesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3d> colors;
  double diameter = 0.0;

  void validate() const;
};

// Builds a mesh and computes its diameter: exact for up to 5000 vertices,
// otherwise over the convex hull vertices (the farthest pair is always on
// the hull).
TriangleMesh make_mesh(std::vector<Vec3d> vertices,
                       std::vector<std::array<int, 3>> faces,
                       std::vector<Vec3d> colors);

double mesh_diameter(const std::vector<Vec3d>& vertices);

// Vertices of the convex hull. Falls back to returning the input set when
// the points are degenerate (coplanar/collinear), which keeps the diameter
// exact at the cost of speed.
std::vector<Vec3d> convex_hull_vertices(const std::vector<Vec3d>& points);

// Procedural meshes used by the test harness and the CLI:
//   cube        0.1 m edge, corner-coded colors
//   wedge       asymmetric pentahedron, ~0.12 m across
//   icosphere   subdivided icosahedron, radius 0.06 m (level 1, 80 faces)
//   icosphere3  level-3 refinement (1280 faces) for depth-accuracy oracles
TriangleMesh builtin_mesh(const std::string& name);

}  // namespace posefit
