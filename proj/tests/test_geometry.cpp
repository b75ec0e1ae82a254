#include <doctest.h>

#include <cmath>

#include "posefit/geometry.hpp"
#include "posefit/rng.hpp"

using namespace posefit;

namespace {

// Independent axis-angle (Rodrigues) rotation used as the oracle for
// quaternion-derived matrices.
Vec3d rodrigues(const Vec3d& axis, double angle, const Vec3d& p) {
  const Vec3d k = normalized(axis);
  const double c = std::cos(angle), s = std::sin(angle);
  return p * c + cross(k, p) * s + k * (dot(k, p) * (1.0 - c));
}

Pose random_pose(Rng& rng) {
  Quat q{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
  return Pose(q, Vec3d{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                       rng.uniform(0.4, 1.5)});
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("quat_to_rotmat identity and axis flips") {
  const Mat3d I = quat_to_rotmat(Quat{1, 0, 0, 0});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(I(r, c) == (r == c ? 1.0 : 0.0));

  // 180 degrees about x: diag(1, -1, -1).
  const Mat3d X = quat_to_rotmat(Quat{0, 1, 0, 0});
  CHECK(X(0, 0) == 1.0);
  CHECK(X(1, 1) == -1.0);
  CHECK(X(2, 2) == -1.0);
  CHECK(std::abs(X(0, 1)) + std::abs(X(0, 2)) + std::abs(X(1, 0)) +
            std::abs(X(1, 2)) + std::abs(X(2, 0)) + std::abs(X(2, 1)) ==
        0.0);
}

TEST_CASE("90-degree z rotation sends x to y, matches Rodrigues") {
  const double h = std::sqrt(0.5);
  const Mat3d R = quat_to_rotmat(Quat{h, 0, 0, h});
  const Vec3d v = R * Vec3d{1, 0, 0};
  CHECK(v.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.z == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    Vec3d axis{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double angle = rng.uniform(-3.0, 3.0);
    const Quat q = axis_angle_quat(axis, angle);
    const Mat3d Rq = quat_to_rotmat(q);
    const Vec3d p{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const Vec3d a = Rq * p;
    const Vec3d b = rodrigues(axis, angle, p);
    CHECK(norm(a - b) < 1e-12);
  }
}

TEST_CASE("rotation matrices are orthonormal with det +1") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Quat q{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const Mat3d R = quat_to_rotmat(q);
    const Mat3d RtR = transpose(R) * R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        CHECK(RtR(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-9));
    CHECK(det(R) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("double cover: q and -q give the same matrix exactly") {
  Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    Quat q{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
    Quat nq{-q.w, -q.x, -q.y, -q.z};
    const Mat3d a = quat_to_rotmat(q);
    const Mat3d b = quat_to_rotmat(nq);
    for (int k = 0; k < 9; ++k) CHECK(a.m[k] == b.m[k]);
  }
}

TEST_CASE("zero quaternion is rejected") {
  CHECK_THROWS_AS(quat_to_rotmat(Quat{0, 0, 0, 0}), InvalidArgumentError);
  CHECK_THROWS_AS(Pose(Quat{0, 0, 0, 0}, Vec3d{}), InvalidArgumentError);
}

TEST_CASE("transform_points trivial cases") {
  const PointCloud pts = {{0, 0, 0}, {0.1, -0.2, 0.3}};
  const Pose ident(Quat{1, 0, 0, 0}, Vec3d{0, 0, 0});
  const PointCloud same = transform_points(ident, pts);
  CHECK(norm(same[1] - pts[1]) == 0.0);

  const Pose shift(Quat{1, 0, 0, 0}, Vec3d{0, 0, 1});
  const PointCloud moved = transform_points(shift, {{0, 0, 0}});
  CHECK(moved[0].x == 0.0);
  CHECK(moved[0].y == 0.0);
  CHECK(moved[0].z == 1.0);
}

TEST_CASE("transform_points matches a homogeneous-matrix oracle") {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    const Pose pose = random_pose(rng);
    PointCloud pts;
    for (int j = 0; j < 30; ++j)
      pts.push_back({rng.gaussian() * 0.1, rng.gaussian() * 0.1,
                     rng.gaussian() * 0.1});
    // 4x4 homogeneous multiply, built independently.
    const Mat3d R = quat_to_rotmat(pose.q());
    double H[4][4] = {{R(0, 0), R(0, 1), R(0, 2), pose.t().x},
                      {R(1, 0), R(1, 1), R(1, 2), pose.t().y},
                      {R(2, 0), R(2, 1), R(2, 2), pose.t().z},
                      {0, 0, 0, 1}};
    const PointCloud got = transform_points(pose, pts);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double hx =
          H[0][0] * pts[j].x + H[0][1] * pts[j].y + H[0][2] * pts[j].z + H[0][3];
      const double hy =
          H[1][0] * pts[j].x + H[1][1] * pts[j].y + H[1][2] * pts[j].z + H[1][3];
      const double hz =
          H[2][0] * pts[j].x + H[2][1] * pts[j].y + H[2][2] * pts[j].z + H[2][3];
      CHECK(got[j].x == doctest::Approx(hx).epsilon(1e-14));
      CHECK(got[j].y == doctest::Approx(hy).epsilon(1e-14));
      CHECK(got[j].z == doctest::Approx(hz).epsilon(1e-14));
    }
  }
}

TEST_CASE("transform_points preserves pairwise distances") {
  Rng rng(19);
  PointCloud pts;
  for (int j = 0; j < 40; ++j)
    pts.push_back({rng.gaussian(), rng.gaussian(), rng.gaussian()});
  const Pose pose = random_pose(rng);
  const PointCloud out = transform_points(pose, pts);
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      CHECK(norm(out[a] - out[b]) ==
            doctest::Approx(norm(pts[a] - pts[b])).epsilon(1e-9));
}

TEST_CASE("project: principal point, offset, behind-camera") {
  CameraIntrinsics K{500, 500, 320, 240, 640, 480};
  const Projected p = project(K, {0, 0, 1});
  CHECK(p.u == 320.0);
  CHECK(p.v == 240.0);
  CHECK(p.depth == 1.0);
  const Projected q = project(K, {0.1, 0, 1});
  CHECK(q.u == doctest::Approx(370.0));
  CHECK(q.v == doctest::Approx(240.0));
  CHECK_THROWS_AS(project(K, {0, 0, 0.005}), BehindCameraError);
  CHECK_THROWS_AS(project(K, {0, 0, -1.0}), BehindCameraError);
}

TEST_CASE("backproject: empty mask, principal pixel, dimension mismatch") {
  CameraIntrinsics K{500, 500, 320, 240, 640, 480};
  ImageD depth(480, 640, 1, 0.0);
  ImageD mask(480, 640, 1, 0.0);
  CHECK(backproject(depth, mask, K).empty());

  depth(240, 320) = 1.0;
  mask(240, 320) = 1.0;
  const PointCloud pc = backproject(depth, mask, K);
  REQUIRE(pc.size() == 1);
  CHECK(pc[0].x == 0.0);
  CHECK(pc[0].y == 0.0);
  CHECK(pc[0].z == 1.0);

  ImageD bad(100, 100, 1, 0.0);
  CHECK_THROWS_AS(backproject(depth, bad, K), InvalidArgumentError);
}

TEST_CASE("project/backproject roundtrip within 1e-9 m") {
  CameraIntrinsics K{431.5, 412.25, 157.3, 121.9, 320, 240};
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const int x = static_cast<int>(rng.uniform(0, K.width));
    const int y = static_cast<int>(rng.uniform(0, K.height));
    const double d = rng.uniform(0.3, 2.0);
    ImageD depth(K.height, K.width, 1, 0.0);
    ImageD mask(K.height, K.width, 1, 0.0);
    depth(y, x) = d;
    mask(y, x) = 1.0;
    const PointCloud pc = backproject(depth, mask, K);
    REQUIRE(pc.size() == 1);
    const Projected p = project(K, pc[0]);
    CHECK(std::abs(p.u - x) * d / K.fx < 1e-9);
    CHECK(std::abs(p.v - y) * d / K.fy < 1e-9);
    CHECK(p.depth == d);
  }
}

TEST_CASE("perturb_pose: zero perturbation, exact angle, determinism") {
  const Pose pose(Quat{0.9, 0.1, -0.3, 0.2}, Vec3d{0.02, -0.01, 0.7});
  const Pose same = perturb_pose(pose, 0, 0, 0.2, 42);
  CHECK(geodesic_deg(same.q(), pose.q()) == 0.0);
  CHECK(norm(same.t() - pose.t()) == 0.0);

  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    const Pose p15 = perturb_pose(pose, 15.0, 0.0, 0.2, seed);
    CHECK(geodesic_deg(p15.q(), pose.q()) == doctest::Approx(15.0).epsilon(1e-6));
    const Pose pt = perturb_pose(pose, 0.0, 0.05, 0.2, seed);
    CHECK(norm(pt.t() - pose.t()) == doctest::Approx(0.05 * 0.2).epsilon(1e-12));
  }

  const Pose a = perturb_pose(pose, 10, 0.03, 0.15, 7);
  const Pose b = perturb_pose(pose, 10, 0.03, 0.15, 7);
  CHECK(a.q().w == b.q().w);
  CHECK(a.q().x == b.q().x);
  CHECK(a.q().y == b.q().y);
  CHECK(a.q().z == b.q().z);
  CHECK(a.t().x == b.t().x);
  CHECK(a.t().y == b.t().y);
  CHECK(a.t().z == b.t().z);
  CHECK_THROWS_AS(perturb_pose(pose, -1, 0, 0.2, 1), InvalidArgumentError);
}

TEST_SUITE_END();
