#pragma once

#include <optional>

#include "posefit/geometry.hpp"
#include "posefit/image.hpp"
#include "posefit/mesh.hpp"

namespace posefit {

// Soft rasterizer configuration. `sigma` is the edge-softness of the
// per-face coverage sigmoid, specified as a fraction of the squared image
// diagonal so the same value works across crop sizes; `gamma` is the
// depth-aggregation temperature in meters.
struct RenderConfig {
  double sigma = 1e-4;
  double gamma = 1e-4;
  double background_depth = 10.0;
  std::optional<PixelRect> crop;

  void validate() const {
    if (!(sigma > 0) || !(gamma > 0))
      throw InvalidArgumentError("sigma and gamma must be positive");
    if (!(background_depth > 0))
      throw InvalidArgumentError("background_depth must be positive");
  }
};

// Rendered color / depth / silhouette for one pose. When S is Jet, every
// pixel additionally carries its derivative with respect to the seven pose
// parameters.
template <class S>
struct Triplet {
  Image<S> color;       // H x W x 3, [0,1]
  Image<S> depth;       // H x W, meters
  Image<S> silhouette;  // H x W, [0,1]

  int height() const { return silhouette.height(); }
  int width() const { return silhouette.width(); }
};

using TripletD = Triplet<double>;
using TripletJ = Triplet<Jet>;

// Differentiable render. Per-face coverage D_f = sigmoid(delta_f / sigma)
// with delta_f the signed squared 2D distance to the projected triangle
// (positive inside); silhouette 1 - prod(1 - D_f); color/depth softmax-
// aggregated over faces with weights proportional to D_f * exp(-zbar_f /
// gamma) plus a background term, color composited against the silhouette so
// uncovered pixels render black.
TripletD render(const Pose& pose, const CameraIntrinsics& K,
                const TriangleMesh& mesh, const RenderConfig& cfg);
TripletJ render_with_grad(const Pose& pose, const CameraIntrinsics& K,
                          const TriangleMesh& mesh, const RenderConfig& cfg);

// Classic z-buffer rasterizer: binary silhouette, nearest-face perspective-
// correct color and depth, background depth 0 (invalid). Deterministic; used
// as the soft renderer's oracle and as the synthetic data generator.
TripletD rasterize_hard(const Pose& pose, const CameraIntrinsics& K,
                        const TriangleMesh& mesh,
                        const std::optional<PixelRect>& crop = {});

// Intrinsics for rendering only into `rect`: principal point shifted by the
// rectangle origin, focal lengths unchanged.
CameraIntrinsics crop_intrinsics(const CameraIntrinsics& K,
                                 const PixelRect& rect);

// Tight bounding box of mask pixels above 0.5. Throws DegenerateMaskError on
// an empty mask.
PixelRect mask_bbox(const ImageD& mask);

// Bounding box of the projected mesh vertices, clipped to the image.
PixelRect projected_bbox(const Pose& pose, const CameraIntrinsics& K,
                         const TriangleMesh& mesh);

// Grows `rect` by `frac` of its size (split evenly per side), clipped to a
// W x H image.
PixelRect dilate_rect(const PixelRect& rect, double frac, int width,
                      int height);

PixelRect union_rect(const PixelRect& a, const PixelRect& b);

}  // namespace posefit
