#pragma once

#include <vector>

#include "posefit/image.hpp"
#include "posefit/mesh.hpp"
#include "posefit/pose.hpp"

namespace posefit {

struct PoseErrorReport {
  double add = 0.0;        // meters
  double add_s = 0.0;      // meters
  double rot_err = 0.0;    // degrees, geodesic
  double trans_err = 0.0;  // meters
  bool add_recall_hit = false;  // (symmetric ? add_s : add) < 0.1 * diameter
};

// Mean L2 deviation of mesh vertices under the two poses. Meshes above 50k
// vertices are subsampled deterministically.
double add_metric(const Pose& pose, const Pose& pose_gt,
                  const TriangleMesh& mesh);

// Symmetry-aware variant: mean over ground-truth-transformed points of the
// distance to the closest predicted-transformed point. Subsample cap 4096.
double add_s_metric(const Pose& pose, const Pose& pose_gt,
                    const TriangleMesh& mesh);

// Geodesic rotation error (degrees) and translation error (meters).
std::pair<double, double> rotation_translation_error(const Pose& pose,
                                                     const Pose& pose_gt);

PoseErrorReport pose_error_report(const Pose& pose, const Pose& pose_gt,
                                  const TriangleMesh& mesh, bool symmetric);

// Fraction of reports whose deviation is strictly below 10% of the mesh
// diameter; add_s for symmetric objects, add otherwise.
double recall_at_threshold(const std::vector<PoseErrorReport>& reports,
                           const TriangleMesh& mesh, bool symmetric);

struct MaskScore {
  double f1 = 0.0;
  double iou = 0.0;
  bool degenerate = false;  // both masks empty; scores defined as 1
};

MaskScore mask_f1_iou(const ImageD& mask_pred, const ImageD& mask_gt);

}  // namespace posefit
