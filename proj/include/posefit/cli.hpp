#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posefit/harness.hpp"

namespace posefit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitAllFailed = 3;

// Everything a run needs, resolved from the TOML config plus flag overrides.
// Sections: [refine], [weights], [render], [toggles], [noise], [sweep],
// [camera].
struct RunConfig {
  RefineConfig refine;
  NoiseSpec noise;
  CameraIntrinsics camera = default_synth_camera();
  std::vector<double> rot_grid = {0, 5, 10, 15, 20};
  int trials = 20;
  double base_rot_deg = 15.0;     // reference perturbation ...
  double base_trans_frac = 0.05;  // ... and its translation fraction
};

RunConfig load_run_config(const std::string& path);  // "" -> defaults
std::string run_config_to_json(const RunConfig& cfg);

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int jobs = 0;  // 0 = all cores
};

struct RefineArgs {
  CommonOptions common;
  std::string frames_dir;
  std::string objects_path;
  std::string object_name;
  std::string init_poses_path;
  bool overlays = false;
};
int cmd_refine(const RefineArgs& args);

struct SweepArgs {
  CommonOptions common;
  std::string objects_path;
  std::string object_name;
};
int cmd_sweep(const SweepArgs& args);

struct AblateArgs {
  CommonOptions common;
  std::string objects_path;
  std::string object_name;
  // Terms to ablate one at a time, from {mask, ab, ms-ssim, perceptual,
  // geom}; empty means all five.
  std::vector<std::string> disable;
};
int cmd_ablate(const AblateArgs& args);

struct EvaluateArgs {
  CommonOptions common;
  std::string poses_path;
  std::string gt_poses_path;
  std::string objects_path;
  std::string object_name;
};
int cmd_evaluate(const EvaluateArgs& args);

struct SynthArgs {
  CommonOptions common;
  std::string objects_path;
  std::string object_name;
  int count = 1;
};
int cmd_synth(const SynthArgs& args);

struct RenderArgs {
  CommonOptions common;
  std::string objects_path;
  std::string object_name;
  std::string pose_path;  // empty: centered default pose
  bool soft = false;      // default is the hard rasterizer
};
int cmd_render(const RenderArgs& args);

struct GradCheckArgs {
  CommonOptions common;
  std::string frame_dir;
  std::string objects_path;
  std::string object_name;
  std::string pose_path;  // empty: frame ground truth
};
int cmd_grad_check(const GradCheckArgs& args);

}  // namespace posefit::cli
