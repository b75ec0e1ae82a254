#pragma once

#include <array>
#include <memory>
#include <vector>

#include "posefit/features.hpp"
#include "posefit/frame.hpp"
#include "posefit/nn.hpp"
#include "posefit/renderer.hpp"

namespace posefit {

// Balance factors for the alignment objective:
// visual = mask + alpha*ab + beta*ms_ssim + gamma*perceptual,
// total  = visual + eta*geom.
struct LossWeights {
  double alpha = 0.2;
  double beta = 1.0;
  double gamma = 0.15;
  double eta = 100.0;

  void validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || eta < 0)
      throw InvalidArgumentError("loss weights must be >= 0");
  }
};

// Term switches for ablations. A disabled term is skipped and reported as 0.
struct LossToggles {
  bool mask = true;
  bool ab = true;
  bool ms_ssim = true;
  bool perceptual = true;
  bool geom = true;

  bool any() const { return mask || ab || ms_ssim || perceptual || geom; }
};

struct LossValue {
  double value = 0.0;
  std::array<double, 7> grad{};
};

struct LossBreakdown {
  double mask = 0, ab = 0, ms_ssim = 0, perceptual = 0;
  double visual = 0, geom = 0, total = 0;
  std::array<double, 7> grad_total{};
  int ms_ssim_scales = 0;  // scales actually used (reduced on small crops)
};

inline constexpr double kSsimC1 = 0.01;
inline constexpr double kSsimC2 = 0.03;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr int kMsssimScales = 5;
inline constexpr int kChamferCap = 4096;
inline constexpr double kLogEps = 1e-7;
inline constexpr int kPerceptualLevels = 5;

// Deterministic uniform-stride subsample down to `cap` points.
PointCloud subsample_cloud(const PointCloud& cloud, int cap = kChamferCap);

// Largest usable scale count for an image: window * 2^(s-1) must fit the
// smaller dimension. Throws when even one scale does not fit.
int ms_ssim_effective_scales(int height, int width,
                             int requested = kMsssimScales);

// Balanced cross-entropy between the observed binary mask and the rendered
// soft silhouette; positive and negative regions normalized separately.
double mask_loss(const ImageD& mask_obs, const ImageD& sil_rendered);
LossValue mask_loss(const ImageD& mask_obs, const ImageJ& sil_rendered);

// Mean L1 chroma difference between the masked observation and the render,
// over all pixels, normalized by the observed foreground count.
double ab_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
               const ImageD& rgb_rendered);
LossValue ab_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                  const ImageJ& rgb_rendered);

// 1 - ms-ssim(masked observation, render) over a dyadic pyramid;
// per-scale contrast-structure terms, luminance at the coarsest scale.
double ms_ssim_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                    const ImageD& rgb_rendered, int* scales_used = nullptr);
LossValue ms_ssim_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                       const ImageJ& rgb_rendered, int* scales_used = nullptr);

// Sum over feature levels of the mean squared distance between channel-
// normalized feature vectors.
double perceptual_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                       const ImageD& rgb_rendered,
                       const FeatureExtractor& fx);
LossValue perceptual_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                          const ImageJ& rgb_rendered,
                          const FeatureExtractor& fx);

// Symmetric mean nearest-neighbor distance (meters). Clouds above the cap
// are subsampled deterministically.
double chamfer_loss(const PointCloud& a, const PointCloud& b);

// Chamfer alignment between the backprojected observed and rendered clouds;
// the gradient flows only through the rendered branch.
double geom_loss(const Frame& frame, const TripletD& triplet,
                 const CameraIntrinsics& K);
LossValue geom_loss(const Frame& frame, const TripletJ& triplet,
                    const CameraIntrinsics& K);

// Mean L1 deviation of mesh vertices transformed by the two poses.
double point_matching_loss(const Pose& pose, const Pose& pose_gt,
                           const TriangleMesh& mesh);

// Observation-side constants for repeated loss evaluation against one frame
// (masked image, chroma, feature maps, SSIM pyramid statistics, observed
// cloud and its NN index). Rebuilding these per call is what the plain
// total_self_loss entry point does.
class LossContext {
 public:
  LossContext(const Frame& frame, const FeatureExtractor& fx,
              const LossToggles& toggles = {});

  LossBreakdown total(const TripletD& triplet, const LossWeights& weights,
                      const LossToggles& toggles = {}) const;
  LossBreakdown total(const TripletJ& triplet, const LossWeights& weights,
                      const LossToggles& toggles = {}) const;

  const Frame& frame() const { return frame_; }

 private:
  template <class S>
  LossBreakdown total_t(const Triplet<S>& triplet, const LossWeights& weights,
                        const LossToggles& toggles) const;

  Frame frame_;
  const FeatureExtractor* fx_;
  int n_pos_ = 0, n_neg_ = 0;
  ImageD masked_rgb_;
  ImageD obs_ab_;
  std::vector<ImageD> obs_feats_;
  struct MsssimObsStats {
    std::vector<ImageD> x, mux, sigx2;
    int scales = 0;
  } msssim_;
  PointCloud obs_cloud_;
  std::unique_ptr<NnGrid> obs_grid_;
};

// The full alignment objective with per-term breakdown and pose gradient.
LossBreakdown total_self_loss(const Frame& frame, const TripletD& triplet,
                              const LossWeights& weights,
                              const FeatureExtractor& fx,
                              const LossToggles& toggles = {});
LossBreakdown total_self_loss(const Frame& frame, const TripletJ& triplet,
                              const LossWeights& weights,
                              const FeatureExtractor& fx,
                              const LossToggles& toggles = {});

}  // namespace posefit
