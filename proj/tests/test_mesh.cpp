#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "posefit/mesh.hpp"
#include "posefit/rng.hpp"
#include "posefit/scene_io.hpp"

using namespace posefit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path d = fs::temp_directory_path() /
               ("posefit_mesh_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
  fs::create_directories(d);
  return d;
}

double brute_diameter(const std::vector<Vec3d>& v) {
  double best = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, norm(v[i] - v[j]));
  return best;
}

// Every edge of a closed triangle mesh is shared by exactly two faces.
bool watertight(const TriangleMesh& m) {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& f : m.faces)
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      ++edges[std::minmax(a, b)];
    }
  for (const auto& [e, n] : edges)
    if (n != 2) return false;
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("mesh");

TEST_CASE("builtin meshes are valid and watertight") {
  for (const char* name : {"cube", "wedge", "icosphere", "icosphere2"}) {
    const TriangleMesh m = builtin_mesh(name);
    CHECK_NOTHROW(m.validate());
    CHECK(watertight(m));
    CHECK(m.diameter > 0.05);
  }
  CHECK_THROWS_AS(builtin_mesh("nope"), InvalidArgumentError);
}

TEST_CASE("cube diameter is the space diagonal") {
  const TriangleMesh cube = builtin_mesh("cube");
  CHECK(cube.diameter ==
        doctest::Approx(std::sqrt(3.0) * 0.1).epsilon(1e-12));
}

TEST_CASE("hull-based diameter equals brute force") {
  Rng rng(31);
  // Above the exact-path threshold to exercise the hull.
  std::vector<Vec3d> pts;
  for (int i = 0; i < 6000; ++i)
    pts.push_back({rng.gaussian(), 0.5 * rng.gaussian(),
                   2.0 * rng.gaussian()});
  const double exact = brute_diameter(pts);
  CHECK(mesh_diameter(pts) == doctest::Approx(exact).epsilon(1e-9));

  // Small clouds take the exact path by definition.
  std::vector<Vec3d> small(pts.begin(), pts.begin() + 500);
  CHECK(mesh_diameter(small) == doctest::Approx(brute_diameter(small)));
}

TEST_CASE("convex hull keeps extreme points on degenerate input") {
  // Coplanar points: hull code must fall back, not crash.
  std::vector<Vec3d> plane;
  Rng rng(37);
  for (int i = 0; i < 6000; ++i)
    plane.push_back({rng.gaussian(), rng.gaussian(), 0.0});
  CHECK(mesh_diameter(plane) == doctest::Approx(brute_diameter(plane)));
}

TEST_CASE("unit-cube PLY in millimeters loads as meters") {
  const fs::path dir = temp_dir();
  const fs::path ply = dir / "cube.ply";
  {
    std::ofstream out(ply);
    out << "ply\nformat ascii 1.0\nelement vertex 8\n"
           "property float x\nproperty float y\nproperty float z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\n"
           "element face 12\nproperty list uchar int vertex_indices\n"
           "end_header\n";
    for (int i = 0; i < 8; ++i)
      out << ((i & 1) ? 100 : 0) << " " << ((i & 2) ? 100 : 0) << " "
          << ((i & 4) ? 100 : 0) << " 200 100 50\n";
    const int f[12][3] = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6},
                          {0, 1, 4}, {1, 5, 4}, {2, 6, 3}, {3, 6, 7},
                          {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    for (auto& tri : f) out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  }
  const TriangleMesh m = load_mesh(ply.string());
  CHECK(m.vertices.size() == 8);
  CHECK(m.faces.size() == 12);
  CHECK(m.diameter == doctest::Approx(std::sqrt(3.0) * 0.1).epsilon(1e-9));
  CHECK(m.colors[0].x == doctest::Approx(200.0 / 255.0));
  fs::remove_all(dir);
}

TEST_CASE("PLY save/load is idempotent at float precision") {
  const fs::path dir = temp_dir();
  const TriangleMesh m0 = builtin_mesh("wedge");
  const fs::path p1 = dir / "a.ply", p2 = dir / "b.ply";
  save_mesh_ply(p1.string(), m0);
  const TriangleMesh m1 = load_mesh(p1.string());
  CHECK(m1.vertices.size() == m0.vertices.size());
  CHECK(m1.faces.size() == m0.faces.size());
  save_mesh_ply(p2.string(), m1);
  const TriangleMesh m2 = load_mesh(p2.string());
  REQUIRE(m2.vertices.size() == m1.vertices.size());
  for (std::size_t i = 0; i < m1.vertices.size(); ++i) {
    CHECK(m1.vertices[i].x == m2.vertices[i].x);
    CHECK(m1.vertices[i].y == m2.vertices[i].y);
    CHECK(m1.vertices[i].z == m2.vertices[i].z);
    CHECK(m1.colors[i].x == m2.colors[i].x);
  }
  for (std::size_t i = 0; i < m1.faces.size(); ++i)
    CHECK(m1.faces[i] == m2.faces[i]);
  fs::remove_all(dir);
}

TEST_CASE("binary PLY roundtrips through the binary reader") {
  const fs::path dir = temp_dir();
  const TriangleMesh m0 = builtin_mesh("icosphere");
  const fs::path p = dir / "s.ply";
  save_mesh_ply(p.string(), m0);
  const TriangleMesh m1 = load_mesh(p.string());
  CHECK(m1.vertices.size() == m0.vertices.size());
  for (std::size_t i = 0; i < m0.vertices.size(); ++i)
    CHECK(norm(m1.vertices[i] - m0.vertices[i]) < 1e-7);  // float32 storage
  fs::remove_all(dir);
}

TEST_CASE("OBJ loader: vertex colors, fan triangulation, negative indices") {
  const fs::path dir = temp_dir();
  const fs::path obj = dir / "quad.obj";
  {
    std::ofstream out(obj);
    out << "v 0 0 0 1 0 0\nv 100 0 0 0 1 0\nv 100 100 0 0 0 1\n"
           "v 0 100 0 1 1 0\n"
           "f 1 2 3 4\n"
           "f -4 -3 -2\n";
  }
  const TriangleMesh m = load_mesh(obj.string());
  CHECK(m.vertices.size() == 4);
  CHECK(m.faces.size() == 3);  // one quad fan (2) + one triangle
  CHECK(m.vertices[1].x == doctest::Approx(0.1));
  CHECK(m.colors[2].z == doctest::Approx(1.0));
  CHECK(m.faces[2][0] == 0);
  fs::remove_all(dir);
}

TEST_CASE("missing colors default to mid-gray; malformed files throw") {
  const fs::path dir = temp_dir();
  const fs::path ply = dir / "gray.ply";
  {
    std::ofstream out(ply);
    out << "ply\nformat ascii 1.0\nelement vertex 3\n"
           "property float x\nproperty float y\nproperty float z\n"
           "element face 1\nproperty list uchar int vertex_indices\n"
           "end_header\n0 0 0\n100 0 0\n0 100 0\n3 0 1 2\n";
  }
  const TriangleMesh m = load_mesh(ply.string());
  CHECK(m.colors[0].x == 0.5);

  const fs::path bad = dir / "bad.ply";
  {
    std::ofstream out(bad);
    out << "ply\nformat ascii 1.0\nelement vertex 2\nwhat even\n";
  }
  CHECK_THROWS_AS(load_mesh(bad.string()), ParseError);
  CHECK_THROWS_AS(load_mesh((dir / "missing.ply").string()), NotFoundError);
  fs::remove_all(dir);
}

TEST_SUITE_END();
