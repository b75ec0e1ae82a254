#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posefit/frame.hpp"
#include "posefit/mesh.hpp"
#include "posefit/renderer.hpp"

namespace posefit {

// File-boundary unit conventions (LineMOD style): mesh vertices and pose
// translations are stored in millimeters, depth PNGs are 16-bit millimeters
// with 0 = invalid. Everything in memory is meters; the conversion happens
// exactly once, here.

// Loads PLY (ascii or binary little-endian) or OBJ meshes; "builtin:<name>"
// resolves to a procedural mesh. Missing vertex colors become mid-gray with
// a warning on stderr.
TriangleMesh load_mesh(const std::string& path);

// Binary little-endian PLY with float32 vertices (millimeters) and uchar
// colors. Saving and reloading is idempotent at float32 precision.
void save_mesh_ply(const std::string& path, const TriangleMesh& mesh);

// Frame directory layout: rgb.png (8-bit), depth.png (16-bit mm), mask.png
// (8-bit, >127 = foreground), camera.json, optional pose_gt.json.
Frame load_frame(const std::string& dir);
void save_frame(const std::string& dir, const Frame& frame);

CameraIntrinsics load_camera_json(const std::string& path);
void save_camera_json(const std::string& path, const CameraIntrinsics& K);

// pose files: {"q": [w,x,y,z], "t_mm": [x,y,z]}.
Pose load_pose_json(const std::string& path);
void save_pose_json(const std::string& path, const Pose& pose);

// Synthetic degradations applied by synth_frame, all deterministic given the
// seed. Color noise is per-pixel Gaussian in [0,1] units after the global
// intensity scale; depth noise is Gaussian in meters on valid pixels; the
// mask is eroded then dilated with a 3x3 box per pixel step.
struct NoiseSpec {
  double color_std = 0.0;
  double intensity_scale = 1.0;
  double depth_std = 0.0;
  int mask_erode = 0;
  int mask_dilate = 0;
};

// Hard-rasterized synthetic observation of `mesh` at `pose`, with the
// generating pose recorded as ground truth.
Frame synth_frame(const TriangleMesh& mesh, const Pose& pose,
                  const CameraIntrinsics& K, const NoiseSpec& noise,
                  std::uint64_t seed);

struct ObjectSpec {
  std::string name;
  std::string mesh_path;
  double diameter_m = 0.0;  // from the mesh unless overridden in the file
  bool symmetric = false;
};

// objects.toml: one [name] table per object with keys mesh (path, relative
// to the toml file), optional diameter_mm, optional symmetric.
std::vector<ObjectSpec> load_objects_toml(const std::string& path);
ObjectSpec find_object(const std::vector<ObjectSpec>& specs,
                       const std::string& name);

Frame crop_frame(const Frame& frame, const PixelRect& rect);

}  // namespace posefit
