#pragma once

#include <cstddef>
#include <vector>

#include "posefit/errors.hpp"
#include "posefit/jet.hpp"

namespace posefit {

// Row-major H x W x C buffer. Channel count is a runtime property so the
// same container serves RGB images, masks, depth maps and feature maps.
template <class T>
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, T fill = T{})
      : h_(height), w_(width), c_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, fill) {
    if (height <= 0 || width <= 0 || channels <= 0)
      throw InvalidArgumentError("image dimensions must be positive");
  }

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  T& operator()(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * w_ + x) * c_ + c];
  }
  const T& operator()(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * w_ + x) * c_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_shape(const Image& o) const {
    return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
  }

 private:
  int h_ = 0, w_ = 0, c_ = 0;
  std::vector<T> data_;
};

using ImageD = Image<double>;
using ImageJ = Image<Jet>;

// Integer pixel rectangle; x/y is the top-left corner.
struct PixelRect {
  int x = 0, y = 0, w = 0, h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
};

template <class T>
Image<T> crop(const Image<T>& img, const PixelRect& r) {
  if (r.empty() || r.x < 0 || r.y < 0 || r.x + r.w > img.width() ||
      r.y + r.h > img.height())
    throw InvalidArgumentError("crop rectangle outside image bounds");
  Image<T> out(r.h, r.w, img.channels());
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      for (int c = 0; c < img.channels(); ++c)
        out(y, x, c) = img(y + r.y, x + r.x, c);
  return out;
}

// 2x average pooling with floor semantics; trailing odd row/column dropped.
template <class T>
Image<T> avg_pool2(const Image<T>& img) {
  const int oh = img.height() / 2, ow = img.width() / 2;
  if (oh == 0 || ow == 0)
    throw InvalidArgumentError("image too small to pool");
  Image<T> out(oh, ow, img.channels());
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < img.channels(); ++c)
        out(y, x, c) = (img(2 * y, 2 * x, c) + img(2 * y, 2 * x + 1, c) +
                        img(2 * y + 1, 2 * x, c) + img(2 * y + 1, 2 * x + 1, c)) *
                       0.25;
  return out;
}

}  // namespace posefit
