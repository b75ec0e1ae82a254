#pragma once

#include <functional>
#include <optional>
#include <string>

#include "posefit/metrics.hpp"
#include "posefit/optimizer.hpp"
#include "posefit/rng.hpp"
#include "posefit/scene_io.hpp"

namespace posefit {

// Desk-scale synthetic scene used by sweeps, ablations and the acceptance
// experiments: a 192x160 camera whose mask-driven ROI lands near 128x128 for
// the bundled meshes.
CameraIntrinsics default_synth_camera();

// Random object pose in front of the camera: uniform orientation, distance
// set so the object projects to roughly 90 px, small lateral jitter.
Pose sample_scene_pose(const TriangleMesh& mesh, const CameraIntrinsics& K,
                       Rng& rng);

struct TrialOutcome {
  bool failed = false;
  std::string error;
  PoseErrorReport init_err;
  PoseErrorReport final_err;
  std::vector<double> loss_curve;  // total per evaluated iteration
  std::vector<double> add_curve;   // ADD at the same iterations
  bool converged = false;
  int iterations = 0;
};

// One seeded synthesize-perturb-refine trial: hard-render a frame at a
// sampled ground-truth pose, perturb it by (rot_deg, trans_frac), refine,
// and score against the ground truth.
TrialOutcome run_recovery_trial(const TriangleMesh& mesh,
                                const CameraIntrinsics& K,
                                const NoiseSpec& noise, double rot_deg,
                                double trans_frac, const RefineConfig& cfg,
                                std::uint64_t trial_seed,
                                const FeatureExtractor& fx);

// Spearman rank correlation with average ranks for ties; nullopt when either
// side has no variation.
std::optional<double> spearman_rho(std::vector<double> a,
                                   std::vector<double> b);

// Runs fn(0..n-1) on up to `jobs` threads (0 = hardware concurrency).
// Results must be written to per-index slots; completion order is unordered.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

// FNV-1a 64-bit digest of a file, as a hex string. Used for manifests.
std::string file_digest(const std::string& path);

}  // namespace posefit
