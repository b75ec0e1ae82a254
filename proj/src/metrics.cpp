#include "posefit/metrics.hpp"

#include <cmath>

#include "posefit/geometry.hpp"
#include "posefit/losses.hpp"
#include "posefit/nn.hpp"

namespace posefit {

namespace {

constexpr int kAddCap = 50000;

std::vector<Vec3d> capped_vertices(const TriangleMesh& mesh, int cap) {
  mesh.validate();
  const std::size_t n = mesh.vertices.size();
  if (n <= static_cast<std::size_t>(cap)) return mesh.vertices;
  std::vector<Vec3d> out;
  out.reserve(cap);
  for (int i = 0; i < cap; ++i)
    out.push_back(
        mesh.vertices[static_cast<std::size_t>(static_cast<double>(i) * n /
                                               cap)]);
  return out;
}

}  // namespace

double add_metric(const Pose& pose, const Pose& pose_gt,
                  const TriangleMesh& mesh) {
  const auto verts = capped_vertices(mesh, kAddCap);
  const Mat3d R = pose.rotation(), Rg = pose_gt.rotation();
  double sum = 0;
  for (const Vec3d& v : verts)
    sum += norm((R * v + pose.t()) - (Rg * v + pose_gt.t()));
  return sum / static_cast<double>(verts.size());
}

double add_s_metric(const Pose& pose, const Pose& pose_gt,
                    const TriangleMesh& mesh) {
  const auto verts = capped_vertices(mesh, kChamferCap);
  const Mat3d R = pose.rotation(), Rg = pose_gt.rotation();
  PointCloud pred;
  pred.reserve(verts.size());
  for (const Vec3d& v : verts) pred.push_back(R * v + pose.t());
  const NnGrid grid(pred);
  double sum = 0;
  for (const Vec3d& v : verts)
    sum += std::sqrt(grid.nearest(Rg * v + pose_gt.t()).second);
  return sum / static_cast<double>(verts.size());
}

std::pair<double, double> rotation_translation_error(const Pose& pose,
                                                     const Pose& pose_gt) {
  return {geodesic_deg(pose.q(), pose_gt.q()),
          norm(pose.t() - pose_gt.t())};
}

PoseErrorReport pose_error_report(const Pose& pose, const Pose& pose_gt,
                                  const TriangleMesh& mesh, bool symmetric) {
  PoseErrorReport r;
  r.add = add_metric(pose, pose_gt, mesh);
  r.add_s = add_s_metric(pose, pose_gt, mesh);
  const auto [rot, trans] = rotation_translation_error(pose, pose_gt);
  r.rot_err = rot;
  r.trans_err = trans;
  r.add_recall_hit = (symmetric ? r.add_s : r.add) < 0.1 * mesh.diameter;
  return r;
}

double recall_at_threshold(const std::vector<PoseErrorReport>& reports,
                           const TriangleMesh& mesh, bool symmetric) {
  if (reports.empty()) throw InvalidArgumentError("empty report list");
  if (!(mesh.diameter > 0))
    throw InvalidArgumentError("mesh diameter not cached");
  int hits = 0;
  for (const auto& r : reports)
    if ((symmetric ? r.add_s : r.add) < 0.1 * mesh.diameter) ++hits;
  return static_cast<double>(hits) / static_cast<double>(reports.size());
}

MaskScore mask_f1_iou(const ImageD& mask_pred, const ImageD& mask_gt) {
  if (mask_pred.height() != mask_gt.height() ||
      mask_pred.width() != mask_gt.width())
    throw InvalidArgumentError("mask dimension mismatch");
  long long tp = 0, fp = 0, fn = 0;
  for (int y = 0; y < mask_pred.height(); ++y)
    for (int x = 0; x < mask_pred.width(); ++x) {
      const bool p = mask_pred(y, x) > 0.5;
      const bool g = mask_gt(y, x) > 0.5;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
  MaskScore s;
  if (tp + fp + fn == 0) {
    s.f1 = 1.0;
    s.iou = 1.0;
    s.degenerate = true;
    return s;
  }
  s.f1 = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
  s.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  return s;
}

}  // namespace posefit
