#include <doctest.h>

#include <cmath>

#include "posefit/color.hpp"
#include "posefit/rng.hpp"

using namespace posefit;

namespace {

// Reference colorimetry pipeline written independently of the library code:
// sRGB -> linear -> XYZ (D65) -> CIELAB a/b.
void reference_ab(double r, double g, double b, double& a_out, double& b_out) {
  auto lin = [](double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double rl = lin(r), gl = lin(g), bl = lin(b);
  const double X = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double Y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double Z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  auto f = [](double t) {
    const double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
  };
  a_out = 500.0 * (f(X / 0.95047) - f(Y));
  b_out = 200.0 * (f(Y) - f(Z / 1.08883));
}

ImageD one_pixel(double r, double g, double b) {
  ImageD img(1, 1, 3);
  img(0, 0, 0) = r;
  img(0, 0, 1) = g;
  img(0, 0, 2) = b;
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("color");

TEST_CASE("neutral grays have zero chroma (rescaled 128/255)") {
  for (double v : {0.0, 0.1, 0.5, 0.73, 1.0}) {
    const ImageD ab = rgb_to_ab(one_pixel(v, v, v));
    CHECK(ab(0, 0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-9));
    CHECK(ab(0, 0, 1) == doctest::Approx(128.0 / 255.0).epsilon(1e-9));
  }
}

TEST_CASE("pure red matches the reference CIELAB formula") {
  double a_ref, b_ref;
  reference_ab(1, 0, 0, a_ref, b_ref);
  // Literature values for sRGB red.
  CHECK(a_ref == doctest::Approx(80.09).epsilon(2e-3));
  CHECK(b_ref == doctest::Approx(67.20).epsilon(2e-3));
  const ImageD ab = rgb_to_ab(one_pixel(1, 0, 0));
  CHECK(ab(0, 0, 0) * 255.0 - 128.0 == doctest::Approx(a_ref).epsilon(1e-9));
  CHECK(ab(0, 0, 1) * 255.0 - 128.0 == doctest::Approx(b_ref).epsilon(1e-9));
}

TEST_CASE("output stays in [0,1] across an RGB lattice") {
  for (int r = 0; r <= 8; ++r)
    for (int g = 0; g <= 8; ++g)
      for (int b = 0; b <= 8; ++b) {
        const ImageD ab = rgb_to_ab(one_pixel(r / 8.0, g / 8.0, b / 8.0));
        CHECK(ab(0, 0, 0) >= 0.0);
        CHECK(ab(0, 0, 0) <= 1.0);
        CHECK(ab(0, 0, 1) >= 0.0);
        CHECK(ab(0, 0, 1) <= 1.0);
      }
}

TEST_CASE("random pixels match the reference oracle to 1e-9") {
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.uniform(), g = rng.uniform(), b = rng.uniform();
    double a_ref, b_ref;
    reference_ab(r, g, b, a_ref, b_ref);
    const ImageD ab = rgb_to_ab(one_pixel(r, g, b));
    CHECK(ab(0, 0, 0) == doctest::Approx((a_ref + 128) / 255).epsilon(1e-9));
    CHECK(ab(0, 0, 1) == doctest::Approx((b_ref + 128) / 255).epsilon(1e-9));
  }
}

TEST_CASE("chroma gradients match finite differences") {
  Rng rng(43);
  for (int i = 0; i < 20; ++i) {
    const double r = rng.uniform(0.05, 0.95);
    const double g = rng.uniform(0.05, 0.95);
    const double b = rng.uniform(0.05, 0.95);
    Jet jr(r, 0), jg(g, 1), jb(b, 2);
    Jet a, bb;
    rgb_to_ab_raw(jr, jg, jb, a, bb);
    const double h = 1e-6;
    double ap, am, bp, bm;
    double tmp;
    reference_ab(r + h, g, b, ap, bp);
    reference_ab(r - h, g, b, am, bm);
    (void)tmp;
    CHECK(a.g[0] == doctest::Approx((ap - am) / (2 * h)).epsilon(1e-4));
    CHECK(bb.g[0] == doctest::Approx((bp - bm) / (2 * h)).epsilon(1e-4));
  }
}

TEST_SUITE_END();
