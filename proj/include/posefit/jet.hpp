#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace posefit {

// Forward-mode dual number carrying derivatives with respect to the seven
// pose parameters (qw, qx, qy, qz, tx, ty, tz). The whole render/loss
// pipeline is templated on the scalar type, so running it on Jet instead of
// double yields the analytic pose gradient of every output.
struct Jet {
  static constexpr int kParams = 7;

  double v = 0.0;
  std::array<double, kParams> g{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: implicit by design
  Jet(double value, int seed_index) : v(value) { g[seed_index] = 1.0; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < kParams; ++i) g[i] += o.g[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < kParams; ++i) g[i] -= o.g[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    for (int i = 0; i < kParams; ++i) g[i] = g[i] * o.v + v * o.g[i];
    v *= o.v;
    return *this;
  }
  Jet& operator+=(double s) {
    v += s;
    return *this;
  }
  Jet& operator-=(double s) {
    v -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    for (int i = 0; i < kParams; ++i) g[i] *= s;
    return *this;
  }
  Jet& operator/=(double s) { return *this *= (1.0 / s); }
};

inline Jet operator-(const Jet& a) {
  Jet r;
  r.v = -a.v;
  for (int i = 0; i < Jet::kParams; ++i) r.g[i] = -a.g[i];
  return r;
}
inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  r += b;
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r -= b;
  return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r = a;
  r *= b;
  return r;
}
inline Jet operator+(const Jet& a, double b) {
  Jet r = a;
  r.v += b;
  return r;
}
inline Jet operator+(double a, const Jet& b) { return b + a; }
inline Jet operator-(const Jet& a, double b) {
  Jet r = a;
  r.v -= b;
  return r;
}
inline Jet operator-(double a, const Jet& b) {
  Jet r = -b;
  r.v += a;
  return r;
}
inline Jet operator*(const Jet& a, double b) {
  Jet r = a;
  r *= b;
  return r;
}
inline Jet operator*(double a, const Jet& b) { return b * a; }

inline Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.v;
  Jet r;
  r.v = a.v * inv;
  for (int i = 0; i < Jet::kParams; ++i)
    r.g[i] = (a.g[i] - r.v * b.g[i]) * inv;
  return r;
}
inline Jet operator/(const Jet& a, double b) { return a * (1.0 / b); }
inline Jet operator/(double a, const Jet& b) {
  const double inv = 1.0 / b.v;
  Jet r;
  r.v = a * inv;
  const double s = -r.v * inv;
  for (int i = 0; i < Jet::kParams; ++i) r.g[i] = s * b.g[i];
  return r;
}

inline bool operator<(const Jet& a, const Jet& b) { return a.v < b.v; }
inline bool operator>(const Jet& a, const Jet& b) { return a.v > b.v; }
inline bool operator<=(const Jet& a, const Jet& b) { return a.v <= b.v; }
inline bool operator>=(const Jet& a, const Jet& b) { return a.v >= b.v; }
inline bool operator<(const Jet& a, double b) { return a.v < b; }
inline bool operator>(const Jet& a, double b) { return a.v > b; }
inline bool operator<=(const Jet& a, double b) { return a.v <= b; }
inline bool operator>=(const Jet& a, double b) { return a.v >= b; }
inline bool operator<(double a, const Jet& b) { return a < b.v; }
inline bool operator>(double a, const Jet& b) { return a > b.v; }

// Chain-rule helper: f(a) with known f(a.v) and f'(a.v).
inline Jet chain(const Jet& a, double fv, double dfv) {
  Jet r;
  r.v = fv;
  for (int i = 0; i < Jet::kParams; ++i) r.g[i] = dfv * a.g[i];
  return r;
}

inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, s > 0.0 ? 0.5 / s : 0.0);
}
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e);
}
inline Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v); }
inline Jet expm1(const Jet& a) {
  return chain(a, std::expm1(a.v), std::exp(a.v));
}
inline Jet abs(const Jet& a) {
  return a.v < 0.0 ? -a : a;  // subgradient at 0: right derivative
}
inline Jet min(const Jet& a, const Jet& b) { return b.v < a.v ? b : a; }
inline Jet max(const Jet& a, const Jet& b) { return a.v < b.v ? b : a; }
inline Jet clamp(const Jet& a, double lo, double hi) {
  if (a.v < lo) return Jet(lo);
  if (a.v > hi) return Jet(hi);
  return a;
}

// Numerically stable log(sigmoid(x)); exact in both tails.
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}
inline Jet log_sigmoid(const Jet& a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return chain(a, log_sigmoid(a.v), 1.0 - s);
}
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}
inline Jet sigmoid(const Jet& a) {
  const double s = sigmoid(a.v);
  return chain(a, s, s * (1.0 - s));
}

// Uniform accessors so templated code can read the scalar value of either
// plain doubles or jets.
inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

inline double sqrt(double x) { return std::sqrt(x); }  // ADL convenience
inline double exp(double x) { return std::exp(x); }
inline double expm1(double x) { return std::expm1(x); }
inline double log(double x) { return std::log(x); }
inline double abs(double x) { return std::abs(x); }
inline double min(double a, double b) { return b < a ? b : a; }
inline double max(double a, double b) { return a < b ? b : a; }
inline double clamp(double a, double lo, double hi) {
  return a < lo ? lo : (a > hi ? hi : a);
}

}  // namespace posefit
