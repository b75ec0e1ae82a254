#pragma once

#include <utility>
#include <vector>

#include "posefit/losses.hpp"

namespace posefit {

// Single-frame refinement settings. First-order adaptive-moment updates on
// the raw quaternion (renormalized after every step) and the translation,
// with separate step sizes for the two blocks.
struct RefineConfig {
  int iterations = 200;
  double lr_q = 1e-2;
  double lr_t = 1e-3;  // meters
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int patience = 30;                  // iterations without improvement
  double min_rel_improvement = 1e-4;  // counts as progress
  int snapshot_every = 10;
  bool sigma_anneal = false;  // halve render sigma at iteration 100
  double roi_dilation = 0.2;
  LossWeights weights;
  LossToggles toggles;
  RenderConfig render;

  void validate() const {
    if (iterations < 1) throw InvalidArgumentError("iterations must be >= 1");
    if (!(lr_q > 0) || !(lr_t > 0))
      throw InvalidArgumentError("step sizes must be positive");
    if (patience < 1) throw InvalidArgumentError("patience must be >= 1");
    weights.validate();
    render.validate();
  }
};

struct RefineTrace {
  std::vector<LossBreakdown> iterations;  // the values actually stepped on
  std::vector<std::pair<int, Pose>> snapshots;
  Pose final_pose;  // best-loss pose seen, not the last one
  double final_total = 0.0;
  int best_iteration = 0;
  bool converged = false;
  PixelRect roi;
};

// ROI used for rendering and loss evaluation: observed mask bounding box
// united with the projected mesh box at `pose`, dilated by cfg.roi_dilation.
PixelRect compute_roi(const Frame& frame, const TriangleMesh& mesh,
                      const Pose& pose, const RefineConfig& cfg);

// Iterative minimization of the alignment objective over the 7 pose
// parameters. Throws InitFailureError when the objective cannot be evaluated
// at `init`; mid-run degeneracies reject the step and halve the step sizes
// (up to 5 times) before giving up with converged = false.
RefineTrace refine_pose(const Frame& frame, const TriangleMesh& mesh,
                        const Pose& init, const RefineConfig& cfg,
                        const FeatureExtractor& fx);
RefineTrace refine_pose(const Frame& frame, const TriangleMesh& mesh,
                        const Pose& init, const RefineConfig& cfg);

struct GradCheckRow {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
  double abs_err = 0.0;
};

struct GradCheckReport {
  std::array<GradCheckRow, 7> rows;
  double max_rel_err = 0.0;
};

// Analytic gradient of the total loss against central finite differences
// (step 1e-4) per pose parameter. Reports, never asserts: near-hard renders
// are allowed to fail the comparison.
GradCheckReport grad_check(const Frame& frame, const TriangleMesh& mesh,
                           const Pose& pose, const RefineConfig& cfg,
                           const FeatureExtractor& fx);
GradCheckReport grad_check(const Frame& frame, const TriangleMesh& mesh,
                           const Pose& pose, const RefineConfig& cfg);

}  // namespace posefit
