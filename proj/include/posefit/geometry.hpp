#pragma once

#include <vector>

#include "posefit/image.hpp"
#include "posefit/pose.hpp"

namespace posefit {

// Points are in the camera frame: +z forward, +x right, +y down. Pixel (0,0)
// is the top-left sample and pixel (x, y) samples the ray through continuous
// image coordinates (x, y), so a point on the optical axis projects exactly
// to (cx, cy).
using PointCloud = std::vector<Vec3d>;

inline constexpr double kZNear = 0.01;  // meters

// Rotation matrix from a quaternion; renormalizes internally, throws on a
// zero-norm input. Result is orthonormal with det +1.
Mat3d quat_to_rotmat(const Quat& q);

// Differentiable version used by the templated render path. Normalization is
// part of the expression so gradients with respect to the raw quaternion
// parameters include the projection onto the unit sphere.
template <class S>
M3<S> quat_to_rotmat_t(const S& qw, const S& qx, const S& qy, const S& qz) {
  using posefit::sqrt;
  const S n2 = qw * qw + qx * qx + qy * qy + qz * qz;
  const S inv = 1.0 / sqrt(n2);
  const S w = qw * inv, x = qx * inv, y = qy * inv, z = qz * inv;
  M3<S> R;
  R(0, 0) = 1.0 - 2.0 * (y * y + z * z);
  R(0, 1) = 2.0 * (x * y - w * z);
  R(0, 2) = 2.0 * (x * z + w * y);
  R(1, 0) = 2.0 * (x * y + w * z);
  R(1, 1) = 1.0 - 2.0 * (x * x + z * z);
  R(1, 2) = 2.0 * (y * z - w * x);
  R(2, 0) = 2.0 * (x * z - w * y);
  R(2, 1) = 2.0 * (y * z + w * x);
  R(2, 2) = 1.0 - 2.0 * (x * x + y * y);
  return R;
}

// Applies R·x + t to every point. Inputs must be finite.
PointCloud transform_points(const Pose& pose, const PointCloud& points);

struct Projected {
  double u = 0, v = 0, depth = 0;
};

// Pinhole projection; throws BehindCameraError when p.z <= znear.
Projected project(const CameraIntrinsics& K, const Vec3d& p);

// Lifts every pixel with mask above `mask_threshold` and positive depth to a
// 3D point. Row-major pixel order; depth in meters, 0 means invalid.
PointCloud backproject(const ImageD& depth, const ImageD& mask,
                       const CameraIntrinsics& K, double mask_threshold = 0.5);

// Rotates by exactly rot_deg about a uniformly random axis and offsets the
// translation by trans_frac * diameter_m in a uniformly random direction.
// Deterministic given the seed.
Pose perturb_pose(const Pose& pose, double rot_deg, double trans_frac,
                  double diameter_m, std::uint64_t seed);

// Geodesic rotation distance in degrees; invariant under q -> -q.
double geodesic_deg(const Quat& a, const Quat& b);

}  // namespace posefit
