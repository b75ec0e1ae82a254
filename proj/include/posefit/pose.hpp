#pragma once

#include <array>
#include <cmath>

#include "posefit/errors.hpp"
#include "posefit/vec.hpp"

namespace posefit {

struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
};

inline double dot(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double norm(const Quat& q) { return std::sqrt(dot(q, q)); }

// Hamilton product.
inline Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quat normalized(const Quat& q) {
  const double n = norm(q);
  if (!(n > 1e-12)) throw InvalidArgumentError("zero-norm quaternion");
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

inline Quat axis_angle_quat(const Vec3d& axis, double angle_rad) {
  const Vec3d a = normalized(axis);
  const double h = 0.5 * angle_rad;
  const double s = std::sin(h);
  return {std::cos(h), a.x * s, a.y * s, a.z * s};
}

// Rigid object-to-camera transform: unit quaternion plus translation in
// meters. The quaternion is renormalized on construction; ||q|| stays 1 to
// within 1e-9 afterwards.
class Pose {
 public:
  Pose() = default;
  Pose(const Quat& q, const Vec3d& t) : q_(normalized(q)), t_(t) {}

  const Quat& q() const { return q_; }
  const Vec3d& t() const { return t_; }

  Mat3d rotation() const;
  Vec3d apply(const Vec3d& p) const { return rotation() * p + t_; }

  // Flat parameter vector (qw, qx, qy, qz, tx, ty, tz); the optimization
  // variable layout shared with Jet seeding.
  std::array<double, 7> params() const {
    return {q_.w, q_.x, q_.y, q_.z, t_.x, t_.y, t_.z};
  }
  static Pose from_params(const std::array<double, 7>& p) {
    return Pose(Quat{p[0], p[1], p[2], p[3]}, Vec3d{p[4], p[5], p[6]});
  }

 private:
  Quat q_;
  Vec3d t_;
};

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0))
      throw InvalidArgumentError("focal lengths must be positive");
    if (width <= 0 || height <= 0)
      throw InvalidArgumentError("image size must be positive");
  }
};

}  // namespace posefit
