#pragma once

#include "posefit/image.hpp"

namespace posefit {

namespace detail {

template <class S>
S srgb_to_linear(const S& c) {
  using posefit::exp;
  using posefit::log;
  if (value_of(c) <= 0.04045) return c * (1.0 / 12.92);
  const S base = (c + 0.055) * (1.0 / 1.055);
  return exp(2.4 * log(base));
}

template <class S>
S lab_f(const S& t) {
  // CIE 1976 cube-root response with the linear toe below (6/29)^3.
  constexpr double d = 6.0 / 29.0;
  constexpr double d3 = d * d * d;
  using posefit::exp;
  using posefit::log;
  if (value_of(t) > d3) return exp((1.0 / 3.0) * log(t));
  return t * (1.0 / (3.0 * d * d)) + 4.0 / 29.0;
}

}  // namespace detail

// CIELAB chroma of one sRGB pixel (D65 white). Outputs the raw (a, b) pair.
template <class S>
void rgb_to_ab_raw(const S& r, const S& g, const S& b, S& a_out, S& b_out) {
  const S rl = detail::srgb_to_linear(r);
  const S gl = detail::srgb_to_linear(g);
  const S bl = detail::srgb_to_linear(b);
  const S x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const S y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const S z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  const S fx = detail::lab_f(x * (1.0 / 0.95047));
  const S fy = detail::lab_f(y);
  const S fz = detail::lab_f(z * (1.0 / 1.08883));
  a_out = 500.0 * (fx - fy);
  b_out = 200.0 * (fy - fz);
}

// Chroma image with the light channel discarded; (a, b) rescaled to [0,1]
// via (x + 128) / 255 so the loss weights keep their meaning.
template <class S>
Image<S> rgb_to_ab(const Image<S>& rgb) {
  if (rgb.channels() != 3) throw InvalidArgumentError("expected 3 channels");
  Image<S> out(rgb.height(), rgb.width(), 2);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      S a, b;
      rgb_to_ab_raw(rgb(y, x, 0), rgb(y, x, 1), rgb(y, x, 2), a, b);
      out(y, x, 0) = (a + 128.0) * (1.0 / 255.0);
      out(y, x, 1) = (b + 128.0) * (1.0 / 255.0);
    }
  }
  return out;
}

extern template Image<double> rgb_to_ab(const Image<double>&);
extern template Image<Jet> rgb_to_ab(const Image<Jet>&);

}  // namespace posefit
