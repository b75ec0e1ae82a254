#include "posefit/mesh.hpp"

#include <cmath>
#include <map>

#include "posefit/errors.hpp"

namespace posefit {

void TriangleMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  if (n == 0) throw InvalidArgumentError("empty mesh");
  if (colors.size() != vertices.size())
    throw InvalidArgumentError("color count must match vertex count");
  for (const auto& f : faces)
    for (int idx : f)
      if (idx < 0 || idx >= n)
        throw InvalidArgumentError("face index out of range");
  for (const auto& c : colors)
    if (c.x < 0 || c.x > 1 || c.y < 0 || c.y > 1 || c.z < 0 || c.z > 1)
      throw InvalidArgumentError("vertex colors must be in [0,1]");
  if (!(diameter > 0)) throw InvalidArgumentError("mesh diameter must be > 0");
}

static double brute_force_diameter(const std::vector<Vec3d>& v) {
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, squared_norm(v[i] - v[j]));
  return std::sqrt(best);
}

double mesh_diameter(const std::vector<Vec3d>& vertices) {
  if (vertices.size() < 2) return 0.0;
  if (vertices.size() <= 5000) return brute_force_diameter(vertices);
  return brute_force_diameter(convex_hull_vertices(vertices));
}

TriangleMesh make_mesh(std::vector<Vec3d> vertices,
                       std::vector<std::array<int, 3>> faces,
                       std::vector<Vec3d> colors) {
  TriangleMesh m;
  m.vertices = std::move(vertices);
  m.faces = std::move(faces);
  m.colors = std::move(colors);
  m.diameter = mesh_diameter(m.vertices);
  m.validate();
  return m;
}

namespace {

TriangleMesh make_cube() {
  const double h = 0.05;  // 0.1 m edge
  std::vector<Vec3d> v;
  std::vector<Vec3d> c;
  for (int i = 0; i < 8; ++i) {
    const double x = (i & 1) ? h : -h;
    const double y = (i & 2) ? h : -h;
    const double z = (i & 4) ? h : -h;
    v.push_back({x, y, z});
    // Corner-coded RGB so every orientation looks different.
    c.push_back({(i & 1) ? 1.0 : 0.1, (i & 2) ? 1.0 : 0.1,
                 (i & 4) ? 1.0 : 0.1});
  }
  std::vector<std::array<int, 3>> f = {
      {0, 2, 1}, {1, 2, 3},  // -z... faces oriented outward (not relied on)
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  };
  return make_mesh(std::move(v), std::move(f), std::move(c));
}

TriangleMesh make_wedge() {
  // Chiral pentahedron: rectangular base with a skewed ridge. No mirror or
  // rotational symmetry, which makes it a good recovery target.
  std::vector<Vec3d> v = {
      {-0.050, -0.035, -0.020}, {0.050, -0.035, -0.020},
      {0.050, 0.035, -0.020},   {-0.050, 0.035, -0.020},
      {-0.018, -0.004, 0.045},  {0.034, 0.012, 0.028},
  };
  std::vector<Vec3d> c = {
      {1.0, 0.15, 0.15}, {0.15, 1.0, 0.15}, {0.15, 0.15, 1.0},
      {1.0, 1.0, 0.2},   {1.0, 0.3, 1.0},   {0.2, 1.0, 1.0},
  };
  std::vector<std::array<int, 3>> f = {
      {0, 1, 2}, {0, 2, 3},            // base
      {0, 4, 1}, {1, 4, 5}, {1, 5, 2},  // sides
      {2, 5, 3}, {3, 5, 4}, {3, 4, 0},
  };
  return make_mesh(std::move(v), std::move(f), std::move(c));
}

TriangleMesh make_icosphere(int level, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3d> v = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1},
  };
  for (auto& p : v) p = normalized(p);
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back(normalized(v[a] + v[b]));
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = mid(tri[0], tri[1]);
      const int b = mid(tri[1], tri[2]);
      const int c = mid(tri[2], tri[0]);
      nf.push_back({tri[0], a, c});
      nf.push_back({tri[1], b, a});
      nf.push_back({tri[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  std::vector<Vec3d> colors;
  colors.reserve(v.size());
  for (auto& p : v) {
    // Position-coded colors; a plain sphere would leave rotation unobservable
    // to the visual terms.
    colors.push_back({0.5 + 0.5 * p.x, 0.5 + 0.5 * p.y, 0.5 + 0.5 * p.z});
    p = p * radius;
  }
  return make_mesh(std::move(v), std::move(f), std::move(colors));
}

}  // namespace

TriangleMesh builtin_mesh(const std::string& name) {
  if (name == "cube") return make_cube();
  if (name == "wedge") return make_wedge();
  if (name == "icosphere") return make_icosphere(1, 0.06);
  if (name == "icosphere2") return make_icosphere(2, 0.06);
  if (name == "icosphere3") return make_icosphere(3, 0.06);
  throw InvalidArgumentError("unknown builtin mesh: " + name);
}

}  // namespace posefit
