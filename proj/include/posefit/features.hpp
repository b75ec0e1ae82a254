#pragma once

#include <memory>
#include <string>
#include <vector>

#include "posefit/image.hpp"

namespace posefit {

// Produces a fixed number of feature maps of decreasing resolution from an
// RGB image. Deterministic: identical input gives identical features. Both
// scalar overloads must implement the same function so pose gradients can
// flow through the rendered branch.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int levels() const = 0;
  virtual std::vector<ImageD> extract(const ImageD& rgb) const = 0;
  virtual std::vector<ImageJ> extract(const ImageJ& rgb) const = 0;
};

// Default hand-built pyramid: five octaves of 2x average pooling; each level
// carries 9 channels (RGB plus horizontal/vertical forward differences per
// channel).
class PyramidFeatureExtractor final : public FeatureExtractor {
 public:
  int levels() const override { return 5; }
  std::vector<ImageD> extract(const ImageD& rgb) const override;
  std::vector<ImageJ> extract(const ImageJ& rgb) const override;
};

// One strided convolution layer of a loaded feature stack.
struct ConvLayer {
  int out_ch = 0, in_ch = 0, kh = 0, kw = 0;
  std::vector<float> weights;  // [out][in][kh][kw]
  std::vector<float> biases;   // [out]
};

// Feature extractor backed by convolution weights loaded from file, so
// pretrained features can be plugged in. Each level applies its layer to the
// previous level's output with stride 2, zero padding (kh/2, kw/2), and a
// ReLU; the level's feature map is the ReLU output.
class ConvStackFeatureExtractor final : public FeatureExtractor {
 public:
  explicit ConvStackFeatureExtractor(std::vector<ConvLayer> layers);

  int levels() const override { return static_cast<int>(layers_.size()); }
  std::vector<ImageD> extract(const ImageD& rgb) const override;
  std::vector<ImageJ> extract(const ImageJ& rgb) const override;

  const std::vector<ConvLayer>& layers() const { return layers_; }

 private:
  std::vector<ConvLayer> layers_;
};

// FXW1 container: magic "FXW1", u32 level count, then per level u32
// out_ch/in_ch/kh/kw, f32 weights row-major, f32 biases. Little-endian.
std::vector<ConvLayer> load_feature_weights(const std::string& path);
void save_feature_weights(const std::string& path,
                          const std::vector<ConvLayer>& layers);

}  // namespace posefit
