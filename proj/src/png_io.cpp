#include "posefit/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "posefit/errors.hpp"

namespace posefit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

// Reads any PNG into rows of `channels` x `bit_depth` samples.
std::vector<std::vector<png_byte>> read_rows(const std::string& path,
                                             int want_depth, int want_channels,
                                             int& width, int& height) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw NotFoundError("cannot open " + path);
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  r.info = png_create_info_struct(r.png);
  if (!r.png || !r.info) throw Error("libpng init failed");
  if (setjmp(png_jmpbuf(r.png))) throw ParseError(path + ": malformed PNG");
  png_init_io(r.png, fp.get());
  png_read_info(r.png, r.info);

  width = static_cast<int>(png_get_image_width(r.png, r.info));
  height = static_cast<int>(png_get_image_height(r.png, r.info));
  const int depth = png_get_bit_depth(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS))
    png_set_tRNS_to_alpha(r.png);
  if (want_depth == 8 && depth == 16) png_set_strip_16(r.png);
  if (want_depth == 16 && depth != 16)
    throw ParseError(path + ": expected a 16-bit PNG");
  if (want_channels == 3) {
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(r.png);
    png_set_strip_alpha(r.png);
  } else {
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
      png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    png_set_strip_alpha(r.png);
  }
  if (want_depth == 16) png_set_swap(r.png);  // PNG stores big-endian
  png_read_update_info(r.png, r.info);

  const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
  std::vector<std::vector<png_byte>> rows(height,
                                          std::vector<png_byte>(rowbytes));
  std::vector<png_bytep> ptrs(height);
  for (int y = 0; y < height; ++y) ptrs[y] = rows[y].data();
  png_read_image(r.png, ptrs.data());
  png_read_end(r.png, nullptr);
  return rows;
}

void write_rows(const std::string& path, int width, int height, int depth,
                int color_type, std::vector<png_bytep>& ptrs) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot write " + path);
  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  w.info = png_create_info_struct(w.png);
  if (!w.png || !w.info) throw Error("libpng init failed");
  if (setjmp(png_jmpbuf(w.png))) throw Error(path + ": PNG write failed");
  png_init_io(w.png, fp.get());
  png_set_IHDR(w.png, w.info, width, height, depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (depth == 16) png_set_swap(w.png);
  png_write_image(w.png, ptrs.data());
  png_write_end(w.png, nullptr);
}

}  // namespace

ImageD read_png_rgb8(const std::string& path) {
  int w = 0, h = 0;
  auto rows = read_rows(path, 8, 3, w, h);
  ImageD out(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        out(y, x, c) = rows[y][3 * x + c] / 255.0;
  return out;
}

Image<std::uint16_t> read_png_gray16(const std::string& path) {
  int w = 0, h = 0;
  auto rows = read_rows(path, 16, 1, w, h);
  Image<std::uint16_t> out(h, w, 1);
  for (int y = 0; y < h; ++y) {
    const std::uint16_t* src =
        reinterpret_cast<const std::uint16_t*>(rows[y].data());
    for (int x = 0; x < w; ++x) out(y, x) = src[x];
  }
  return out;
}

void write_png_rgb8(const std::string& path, const ImageD& rgb) {
  if (rgb.channels() != 3) throw InvalidArgumentError("expected 3 channels");
  const int h = rgb.height(), w = rgb.width();
  std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>(3 * w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = rgb(y, x, c);
        rows[y][3 * x + c] = static_cast<png_byte>(
            std::lround(std::min(1.0, std::max(0.0, v)) * 255.0));
      }
  std::vector<png_bytep> ptrs(h);
  for (int y = 0; y < h; ++y) ptrs[y] = rows[y].data();
  write_rows(path, w, h, 8, PNG_COLOR_TYPE_RGB, ptrs);
}

void write_png_gray8(const std::string& path, const ImageD& gray) {
  if (gray.channels() != 1) throw InvalidArgumentError("expected 1 channel");
  const int h = gray.height(), w = gray.width();
  std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>(w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = gray(y, x);
      rows[y][x] = static_cast<png_byte>(
          std::lround(std::min(1.0, std::max(0.0, v)) * 255.0));
    }
  std::vector<png_bytep> ptrs(h);
  for (int y = 0; y < h; ++y) ptrs[y] = rows[y].data();
  write_rows(path, w, h, 8, PNG_COLOR_TYPE_GRAY, ptrs);
}

void write_png_gray16(const std::string& path,
                      const Image<std::uint16_t>& gray) {
  if (gray.channels() != 1) throw InvalidArgumentError("expected 1 channel");
  const int h = gray.height(), w = gray.width();
  std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>(2 * w));
  for (int y = 0; y < h; ++y) {
    std::uint16_t* dst = reinterpret_cast<std::uint16_t*>(rows[y].data());
    for (int x = 0; x < w; ++x) dst[x] = gray(y, x);
  }
  std::vector<png_bytep> ptrs(h);
  for (int y = 0; y < h; ++y) ptrs[y] = rows[y].data();
  write_rows(path, w, h, 16, PNG_COLOR_TYPE_GRAY, ptrs);
}

}  // namespace posefit
