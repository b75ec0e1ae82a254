#include <algorithm>
#include <cmath>
#include <vector>

#include "posefit/mesh.hpp"

namespace posefit {

namespace {

struct HullFace {
  int a, b, c;
  Vec3d normal;         // not normalized
  double offset;        // dot(normal, vertex on face)
  std::vector<int> outside;
  bool alive = true;
};

double dist_above(const HullFace& f, const Vec3d& p) {
  return dot(f.normal, p) - f.offset;
}

}  // namespace

// Quickhull. Used only to keep diameter computation subquadratic for big
// meshes; the farthest vertex pair is always a pair of hull vertices, so any
// over-inclusive vertex set is still exact.
std::vector<Vec3d> convex_hull_vertices(const std::vector<Vec3d>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 8) return points;

  // Scale-relative tolerance.
  Vec3d lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const double scale = norm(hi - lo);
  const double eps = 1e-10 * std::max(scale, 1e-30);

  // Initial simplex: extremes in x, then farthest from segment, then from
  // plane. Degenerate input falls back to the full set.
  int i0 = 0, i1 = 0;
  for (int i = 0; i < n; ++i) {
    if (points[i].x < points[i0].x) i0 = i;
    if (points[i].x > points[i1].x) i1 = i;
  }
  if (squared_norm(points[i1] - points[i0]) < eps * eps) return points;
  int i2 = -1;
  double best = eps * eps;
  const Vec3d d01 = points[i1] - points[i0];
  for (int i = 0; i < n; ++i) {
    const double a2 = squared_norm(cross(d01, points[i] - points[i0])) /
                      squared_norm(d01);
    if (a2 > best) {
      best = a2;
      i2 = i;
    }
  }
  if (i2 < 0) return points;
  int i3 = -1;
  best = eps;
  const Vec3d nrm = cross(d01, points[i2] - points[i0]);
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(dot(nrm, points[i] - points[i0])) / norm(nrm);
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (i3 < 0) return points;

  std::vector<HullFace> faces;
  auto add_face = [&](int a, int b, int c, const Vec3d& interior) {
    HullFace f;
    f.a = a;
    f.b = b;
    f.c = c;
    f.normal = cross(points[b] - points[a], points[c] - points[a]);
    f.offset = dot(f.normal, points[a]);
    if (dist_above(f, interior) > 0) {  // orient outward
      std::swap(f.b, f.c);
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    faces.push_back(std::move(f));
    return static_cast<int>(faces.size()) - 1;
  };
  const Vec3d centroid = (points[i0] + points[i1] + points[i2] + points[i3]) *
                         0.25;
  add_face(i0, i1, i2, centroid);
  add_face(i0, i1, i3, centroid);
  add_face(i0, i2, i3, centroid);
  add_face(i1, i2, i3, centroid);

  auto face_eps = [&](const HullFace& f) { return eps * norm(f.normal); };
  for (int i = 0; i < n; ++i) {
    for (auto& f : faces) {
      if (dist_above(f, points[i]) > face_eps(f)) {
        f.outside.push_back(i);
        break;
      }
    }
  }

  while (true) {
    std::size_t fi = faces.size();
    for (std::size_t j = 0; j < faces.size(); ++j) {
      if (faces[j].alive && !faces[j].outside.empty()) {
        fi = j;
        break;
      }
    }
    if (fi == faces.size()) break;
    // Farthest conflict point of this face.
    int far = faces[fi].outside[0];
    double far_d = dist_above(faces[fi], points[far]);
    for (int idx : faces[fi].outside) {
      const double d = dist_above(faces[fi], points[idx]);
      if (d > far_d) {
        far_d = d;
        far = idx;
      }
    }
    // All faces visible from `far`.
    std::vector<int> visible;
    std::vector<int> orphan;
    for (std::size_t j = 0; j < faces.size(); ++j) {
      if (faces[j].alive && dist_above(faces[j], points[far]) > face_eps(faces[j])) {
        visible.push_back(static_cast<int>(j));
        faces[j].alive = false;
        orphan.insert(orphan.end(), faces[j].outside.begin(),
                      faces[j].outside.end());
        faces[j].outside.clear();
      }
    }
    // Horizon: edges of visible faces not shared with another visible face.
    struct Edge {
      int u, v;
    };
    std::vector<Edge> horizon;
    auto edge_count = [&](int u, int v) {
      int cnt = 0;
      for (int j : visible) {
        const HullFace& f = faces[j];
        const int e[3][2] = {{f.a, f.b}, {f.b, f.c}, {f.c, f.a}};
        for (auto& ee : e)
          if ((ee[0] == u && ee[1] == v) || (ee[0] == v && ee[1] == u)) ++cnt;
      }
      return cnt;
    };
    for (int j : visible) {
      const HullFace& f = faces[j];
      const int e[3][2] = {{f.a, f.b}, {f.b, f.c}, {f.c, f.a}};
      for (auto& ee : e)
        if (edge_count(ee[0], ee[1]) == 1) horizon.push_back({ee[0], ee[1]});
    }
    std::vector<int> fresh;
    for (const Edge& e : horizon)
      fresh.push_back(add_face(e.u, e.v, far, centroid));
    // Reassign orphans.
    std::sort(orphan.begin(), orphan.end());
    orphan.erase(std::unique(orphan.begin(), orphan.end()), orphan.end());
    for (int idx : orphan) {
      if (idx == far) continue;
      for (int j : fresh) {
        if (dist_above(faces[j], points[idx]) > face_eps(faces[j])) {
          faces[j].outside.push_back(idx);
          break;
        }
      }
    }
  }

  std::vector<char> on_hull(n, 0);
  for (const auto& f : faces)
    if (f.alive) on_hull[f.a] = on_hull[f.b] = on_hull[f.c] = 1;
  std::vector<Vec3d> out;
  for (int i = 0; i < n; ++i)
    if (on_hull[i]) out.push_back(points[i]);
  if (out.size() < 4) return points;  // degenerate; stay exact
  return out;
}

}  // namespace posefit
