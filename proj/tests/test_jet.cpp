#include <doctest.h>

#include <cmath>

#include "posefit/jet.hpp"

using namespace posefit;

namespace {

// Central finite difference of a scalar function of one seeded parameter.
template <class F>
double fd(F f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE_BEGIN("jet");

TEST_CASE("arithmetic matches finite differences on a composite") {
  auto expr = [](auto x) {
    using posefit::abs;
    using posefit::exp;
    using posefit::log;
    using posefit::sqrt;
    return exp(x * 0.3) / (x + 2.0) + sqrt(x * x + 1.0) * log(x + 3.0) -
           abs(x - 0.7);
  };
  for (double x : {-1.5, -0.2, 0.3, 1.1, 2.5}) {
    Jet jx(x, 0);
    const Jet r = expr(jx);
    CHECK(r.v == doctest::Approx(expr(x)).epsilon(1e-12));
    CHECK(r.g[0] == doctest::Approx(fd(expr, x)).epsilon(1e-6));
    for (int k = 1; k < 7; ++k) CHECK(r.g[k] == 0.0);
  }
}

TEST_CASE("division and reciprocal rules") {
  Jet a(3.0, 0), b(7.0, 1);
  const Jet q = a / b;
  CHECK(q.v == doctest::Approx(3.0 / 7.0));
  CHECK(q.g[0] == doctest::Approx(1.0 / 7.0));
  CHECK(q.g[1] == doctest::Approx(-3.0 / 49.0));
  const Jet r = 2.0 / b;
  CHECK(r.g[1] == doctest::Approx(-2.0 / 49.0));
}

TEST_CASE("sigmoid and log_sigmoid stable in both tails") {
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
  CHECK(log_sigmoid(800.0) == doctest::Approx(0.0));
  Jet x(-50.0, 2);
  const Jet ls = log_sigmoid(x);
  CHECK(std::isfinite(ls.v));
  CHECK(ls.g[2] == doctest::Approx(1.0 - sigmoid(-50.0)));
}

TEST_CASE("min/max/clamp select by value and keep the winner's gradient") {
  Jet a(1.0, 0), b(2.0, 1);
  CHECK(min(a, b).g[0] == 1.0);
  CHECK(max(a, b).g[1] == 1.0);
  const Jet c = clamp(Jet(5.0, 3), 0.0, 1.0);
  CHECK(c.v == 1.0);
  CHECK(c.g[3] == 0.0);  // saturated: no gradient
  const Jet d = clamp(Jet(0.5, 3), 0.0, 1.0);
  CHECK(d.g[3] == 1.0);
}

TEST_CASE("abs subgradient") {
  CHECK(abs(Jet(-2.0, 0)).g[0] == -1.0);
  CHECK(abs(Jet(2.0, 0)).g[0] == 1.0);
}

TEST_SUITE_END();
