#include "posefit/features.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "posefit/errors.hpp"

namespace posefit {

namespace {

template <class S>
Image<S> gradient_features(const Image<S>& rgb) {
  const int h = rgb.height(), w = rgb.width();
  Image<S> out(h, w, 9, S(0.0));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        out(y, x, c) = rgb(y, x, c);
        if (x + 1 < w) out(y, x, 3 + c) = rgb(y, x + 1, c) - rgb(y, x, c);
        if (y + 1 < h) out(y, x, 6 + c) = rgb(y + 1, x, c) - rgb(y, x, c);
      }
  return out;
}

template <class S>
std::vector<Image<S>> pyramid_extract(const Image<S>& rgb) {
  if (rgb.channels() != 3) throw InvalidArgumentError("expected 3 channels");
  std::vector<Image<S>> out;
  Image<S> level = rgb;
  for (int l = 0; l < 5; ++l) {
    if (l > 0) level = avg_pool2(level);
    out.push_back(gradient_features(level));
  }
  return out;
}

template <class S>
Image<S> conv_stride2_relu(const Image<S>& in, const ConvLayer& layer) {
  if (in.channels() != layer.in_ch)
    throw ConfigurationError("conv layer channel mismatch");
  const int ph = layer.kh / 2, pw = layer.kw / 2;
  const int oh = (in.height() + 2 * ph - layer.kh) / 2 + 1;
  const int ow = (in.width() + 2 * pw - layer.kw) / 2 + 1;
  if (oh <= 0 || ow <= 0)
    throw InvalidArgumentError("image too small for conv stack");
  Image<S> out(oh, ow, layer.out_ch);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int oc = 0; oc < layer.out_ch; ++oc) {
        S acc(static_cast<double>(layer.biases[oc]));
        const float* wbase =
            layer.weights.data() +
            static_cast<std::size_t>(oc) * layer.in_ch * layer.kh * layer.kw;
        for (int ic = 0; ic < layer.in_ch; ++ic) {
          for (int ky = 0; ky < layer.kh; ++ky) {
            const int iy = oy * 2 - ph + ky;
            if (iy < 0 || iy >= in.height()) continue;
            for (int kx = 0; kx < layer.kw; ++kx) {
              const int ix = ox * 2 - pw + kx;
              if (ix < 0 || ix >= in.width()) continue;
              const double wv =
                  wbase[(static_cast<std::size_t>(ic) * layer.kh + ky) *
                            layer.kw +
                        kx];
              acc += wv * in(iy, ix, ic);
            }
          }
        }
        out(oy, ox, oc) = max(acc, S(0.0));
      }
    }
  }
  return out;
}

template <class S>
std::vector<Image<S>> conv_extract(const Image<S>& rgb,
                                   const std::vector<ConvLayer>& layers) {
  std::vector<Image<S>> out;
  Image<S> cur = rgb;
  for (const ConvLayer& layer : layers) {
    cur = conv_stride2_relu(cur, layer);
    out.push_back(cur);
  }
  return out;
}

}  // namespace

std::vector<ImageD> PyramidFeatureExtractor::extract(const ImageD& rgb) const {
  return pyramid_extract(rgb);
}
std::vector<ImageJ> PyramidFeatureExtractor::extract(const ImageJ& rgb) const {
  return pyramid_extract(rgb);
}

ConvStackFeatureExtractor::ConvStackFeatureExtractor(
    std::vector<ConvLayer> layers)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigurationError("empty conv stack");
  if (layers_.front().in_ch != 3)
    throw ConfigurationError("first conv layer must take 3 channels");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const ConvLayer& l = layers_[i];
    if (l.out_ch <= 0 || l.in_ch <= 0 || l.kh <= 0 || l.kw <= 0)
      throw ConfigurationError("conv layer with non-positive shape");
    if (l.weights.size() != static_cast<std::size_t>(l.out_ch) * l.in_ch *
                                l.kh * l.kw ||
        l.biases.size() != static_cast<std::size_t>(l.out_ch))
      throw ConfigurationError("conv layer weight size mismatch");
    if (i > 0 && l.in_ch != layers_[i - 1].out_ch)
      throw ConfigurationError("conv stack channel chain mismatch");
  }
}

std::vector<ImageD> ConvStackFeatureExtractor::extract(
    const ImageD& rgb) const {
  return conv_extract(rgb, layers_);
}
std::vector<ImageJ> ConvStackFeatureExtractor::extract(
    const ImageJ& rgb) const {
  return conv_extract(rgb, layers_);
}

namespace {

template <class T>
T read_le(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw ParseError(path + ": truncated at byte offset " +
                     std::to_string(static_cast<long long>(in.tellg())));
  return v;
}

}  // namespace

std::vector<ConvLayer> load_feature_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "FXW1", 4) != 0)
    throw ParseError(path + ": bad magic, expected FXW1");
  const auto count = read_le<std::uint32_t>(in, path);
  if (count == 0 || count > 64) throw ParseError(path + ": bad level count");
  std::vector<ConvLayer> layers(count);
  for (auto& l : layers) {
    l.out_ch = static_cast<int>(read_le<std::uint32_t>(in, path));
    l.in_ch = static_cast<int>(read_le<std::uint32_t>(in, path));
    l.kh = static_cast<int>(read_le<std::uint32_t>(in, path));
    l.kw = static_cast<int>(read_le<std::uint32_t>(in, path));
    if (l.out_ch <= 0 || l.in_ch <= 0 || l.kh <= 0 || l.kw <= 0 ||
        static_cast<long long>(l.out_ch) * l.in_ch * l.kh * l.kw > (1 << 28))
      throw ParseError(path + ": implausible layer shape");
    l.weights.resize(static_cast<std::size_t>(l.out_ch) * l.in_ch * l.kh *
                     l.kw);
    l.biases.resize(l.out_ch);
    if (!in.read(reinterpret_cast<char*>(l.weights.data()),
                 static_cast<std::streamsize>(l.weights.size() * 4)) ||
        !in.read(reinterpret_cast<char*>(l.biases.data()),
                 static_cast<std::streamsize>(l.biases.size() * 4)))
      throw ParseError(path + ": truncated weight payload");
  }
  return layers;
}

void save_feature_weights(const std::string& path,
                          const std::vector<ConvLayer>& layers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write("FXW1", 4);
  const std::uint32_t count = static_cast<std::uint32_t>(layers.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& l : layers) {
    const std::uint32_t dims[4] = {
        static_cast<std::uint32_t>(l.out_ch),
        static_cast<std::uint32_t>(l.in_ch),
        static_cast<std::uint32_t>(l.kh),
        static_cast<std::uint32_t>(l.kw)};
    out.write(reinterpret_cast<const char*>(dims), 16);
    out.write(reinterpret_cast<const char*>(l.weights.data()),
              static_cast<std::streamsize>(l.weights.size() * 4));
    out.write(reinterpret_cast<const char*>(l.biases.data()),
              static_cast<std::streamsize>(l.biases.size() * 4));
  }
}

}  // namespace posefit
