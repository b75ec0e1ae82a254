#include "posefit/geometry.hpp"

#include <cmath>

#include "posefit/rng.hpp"

namespace posefit {

Mat3d quat_to_rotmat(const Quat& q) {
  const Quat n = normalized(q);  // throws on zero norm
  return quat_to_rotmat_t<double>(n.w, n.x, n.y, n.z);
}

Mat3d Pose::rotation() const {
  return quat_to_rotmat_t<double>(q_.w, q_.x, q_.y, q_.z);
}

PointCloud transform_points(const Pose& pose, const PointCloud& points) {
  const Mat3d R = pose.rotation();
  PointCloud out;
  out.reserve(points.size());
  for (const Vec3d& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw InvalidArgumentError("non-finite point");
    out.push_back(R * p + pose.t());
  }
  return out;
}

Projected project(const CameraIntrinsics& K, const Vec3d& p) {
  if (!(p.z > kZNear)) throw BehindCameraError("point behind near plane");
  return {K.fx * p.x / p.z + K.cx, K.fy * p.y / p.z + K.cy, p.z};
}

PointCloud backproject(const ImageD& depth, const ImageD& mask,
                       const CameraIntrinsics& K, double mask_threshold) {
  if (depth.height() != mask.height() || depth.width() != mask.width())
    throw InvalidArgumentError("depth/mask dimension mismatch");
  PointCloud out;
  const double ifx = 1.0 / K.fx, ify = 1.0 / K.fy;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth(y, x);
      if (mask(y, x) > mask_threshold && d > 0.0) {
        out.push_back({(x - K.cx) * ifx * d, (y - K.cy) * ify * d, d});
      }
    }
  }
  return out;
}

Pose perturb_pose(const Pose& pose, double rot_deg, double trans_frac,
                  double diameter_m, std::uint64_t seed) {
  if (rot_deg < 0 || trans_frac < 0)
    throw InvalidArgumentError("perturbation magnitudes must be >= 0");
  Rng rng(seed);
  Vec3d axis;
  rng.unit_vector(axis.x, axis.y, axis.z);
  Vec3d dir;
  rng.unit_vector(dir.x, dir.y, dir.z);
  Quat q = pose.q();
  if (rot_deg > 0) {
    const double rad = rot_deg * std::numbers::pi / 180.0;
    q = axis_angle_quat(axis, rad) * pose.q();
  }
  Vec3d t = pose.t();
  if (trans_frac > 0) t = t + dir * (trans_frac * diameter_m);
  return Pose(q, t);
}

double geodesic_deg(const Quat& a, const Quat& b) {
  const double d = std::min(1.0, std::abs(dot(normalized(a), normalized(b))));
  return 2.0 * std::acos(d) * 180.0 / std::numbers::pi;
}

}  // namespace posefit
