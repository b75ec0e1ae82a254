#pragma once

#include <string>

#include "posefit/image.hpp"

namespace posefit {

// 8-bit PNG -> [0,1] doubles. Gray and RGBA inputs are widened/flattened to
// 3 channels.
ImageD read_png_rgb8(const std::string& path);

// 16-bit grayscale PNG, raw integer values (no scaling).
Image<std::uint16_t> read_png_gray16(const std::string& path);

void write_png_rgb8(const std::string& path, const ImageD& rgb);
void write_png_gray8(const std::string& path, const ImageD& gray);
void write_png_gray16(const std::string& path,
                      const Image<std::uint16_t>& gray);

}  // namespace posefit
