#pragma once

#include <array>
#include <cmath>

#include "posefit/jet.hpp"

namespace posefit {

template <class T>
struct V2 {
  T x{}, y{};
};

template <class T>
struct V3 {
  T x{}, y{}, z{};
};

using Vec2d = V2<double>;
using Vec3d = V3<double>;

template <class T>
inline V2<T> operator+(const V2<T>& a, const V2<T>& b) {
  return {a.x + b.x, a.y + b.y};
}
template <class T>
inline V2<T> operator-(const V2<T>& a, const V2<T>& b) {
  return {a.x - b.x, a.y - b.y};
}
template <class T, class S>
inline auto operator*(const V2<T>& a, S s) -> V2<decltype(a.x * s)> {
  return {a.x * s, a.y * s};
}
template <class T>
inline T dot(const V2<T>& a, const V2<T>& b) {
  return a.x * b.x + a.y * b.y;
}
// 2D cross product (z component).
template <class T>
inline T cross(const V2<T>& a, const V2<T>& b) {
  return a.x * b.y - a.y * b.x;
}

template <class T>
inline V3<T> operator+(const V3<T>& a, const V3<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class T>
inline V3<T> operator-(const V3<T>& a, const V3<T>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class T>
inline V3<T> operator-(const V3<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T, class S>
inline auto operator*(const V3<T>& a, S s) -> V3<decltype(a.x * s)> {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T>
inline T dot(const V3<T>& a, const V3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
template <class T>
inline V3<T> cross(const V3<T>& a, const V3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}
template <class T>
inline T squared_norm(const V3<T>& a) {
  return dot(a, a);
}
template <class T>
inline T norm(const V3<T>& a) {
  using posefit::sqrt;
  return sqrt(dot(a, a));
}
inline Vec3d normalized(const Vec3d& a) {
  const double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

// Row-major 3x3 matrix.
template <class T>
struct M3 {
  std::array<T, 9> m{};

  T& operator()(int r, int c) { return m[r * 3 + c]; }
  const T& operator()(int r, int c) const { return m[r * 3 + c]; }
};

using Mat3d = M3<double>;

template <class T>
inline V3<T> operator*(const M3<T>& A, const V3<T>& v) {
  return {A.m[0] * v.x + A.m[1] * v.y + A.m[2] * v.z,
          A.m[3] * v.x + A.m[4] * v.y + A.m[5] * v.z,
          A.m[6] * v.x + A.m[7] * v.y + A.m[8] * v.z};
}
template <class T>
inline V3<T> operator*(const M3<T>& A, const Vec3d& v)
  requires(!std::is_same_v<T, double>)
{
  return {A.m[0] * v.x + A.m[1] * v.y + A.m[2] * v.z,
          A.m[3] * v.x + A.m[4] * v.y + A.m[5] * v.z,
          A.m[6] * v.x + A.m[7] * v.y + A.m[8] * v.z};
}
template <class T>
inline M3<T> operator*(const M3<T>& A, const M3<T>& B) {
  M3<T> R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      R(r, c) = A(r, 0) * B(0, c) + A(r, 1) * B(1, c) + A(r, 2) * B(2, c);
  return R;
}
template <class T>
inline M3<T> transpose(const M3<T>& A) {
  M3<T> R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = A(c, r);
  return R;
}
template <class T>
inline T det(const M3<T>& A) {
  return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
         A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
         A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
}

}  // namespace posefit
