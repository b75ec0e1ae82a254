#include "posefit/scene_io.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "posefit/png_io.hpp"
#include "posefit/rng.hpp"
#include "posefit/toml.hpp"

namespace posefit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kMmToM = 1e-3;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

CameraIntrinsics load_camera_json(const std::string& path) {
  const json j = load_json(path);
  CameraIntrinsics K;
  try {
    K.fx = j.at("fx").get<double>();
    K.fy = j.at("fy").get<double>();
    K.cx = j.at("cx").get<double>();
    K.cy = j.at("cy").get<double>();
    K.width = j.at("width").get<int>();
    K.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  K.validate();
  return K;
}

void save_camera_json(const std::string& path, const CameraIntrinsics& K) {
  dump_json(path, json{{"fx", K.fx},
                       {"fy", K.fy},
                       {"cx", K.cx},
                       {"cy", K.cy},
                       {"width", K.width},
                       {"height", K.height}});
}

Pose load_pose_json(const std::string& path) {
  const json j = load_json(path);
  try {
    const auto q = j.at("q").get<std::vector<double>>();
    const auto t = j.at("t_mm").get<std::vector<double>>();
    if (q.size() != 4 || t.size() != 3)
      throw ParseError(path + ": q must have 4 and t_mm 3 entries");
    return Pose(Quat{q[0], q[1], q[2], q[3]},
                Vec3d{t[0] * kMmToM, t[1] * kMmToM, t[2] * kMmToM});
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_pose_json(const std::string& path, const Pose& pose) {
  dump_json(path,
            json{{"q", {pose.q().w, pose.q().x, pose.q().y, pose.q().z}},
                 {"t_mm",
                  {pose.t().x / kMmToM, pose.t().y / kMmToM,
                   pose.t().z / kMmToM}}});
}

Frame load_frame(const std::string& dir) {
  const fs::path d(dir);
  for (const char* required : {"rgb.png", "depth.png", "mask.png",
                               "camera.json"})
    if (!fs::exists(d / required))
      throw NotFoundError(dir + ": missing required file " + required);

  Frame f;
  f.rgb = read_png_rgb8((d / "rgb.png").string());
  const auto depth_mm = read_png_gray16((d / "depth.png").string());
  f.depth = ImageD(depth_mm.height(), depth_mm.width(), 1);
  for (int y = 0; y < depth_mm.height(); ++y)
    for (int x = 0; x < depth_mm.width(); ++x)
      f.depth(y, x) = depth_mm(y, x) * kMmToM;

  ImageD mask_raw = read_png_rgb8((d / "mask.png").string());
  f.mask = ImageD(mask_raw.height(), mask_raw.width(), 1);
  for (int y = 0; y < mask_raw.height(); ++y)
    for (int x = 0; x < mask_raw.width(); ++x)
      f.mask(y, x) = mask_raw(y, x, 0) > 127.5 / 255.0 ? 1.0 : 0.0;

  f.K = load_camera_json((d / "camera.json").string());
  if (fs::exists(d / "pose_gt.json"))
    f.gt_pose = load_pose_json((d / "pose_gt.json").string());
  f.validate();
  return f;
}

void save_frame(const std::string& dir, const Frame& frame) {
  frame.validate();
  fs::create_directories(dir);
  const fs::path d(dir);
  write_png_rgb8((d / "rgb.png").string(), frame.rgb);
  Image<std::uint16_t> depth_mm(frame.depth.height(), frame.depth.width(), 1);
  for (int y = 0; y < frame.depth.height(); ++y)
    for (int x = 0; x < frame.depth.width(); ++x) {
      const double mm = frame.depth(y, x) / kMmToM;
      depth_mm(y, x) = static_cast<std::uint16_t>(
          std::lround(std::min(65535.0, std::max(0.0, mm))));
    }
  write_png_gray16((d / "depth.png").string(), depth_mm);
  write_png_gray8((d / "mask.png").string(), frame.mask);
  save_camera_json((d / "camera.json").string(), frame.K);
  if (frame.gt_pose)
    save_pose_json((d / "pose_gt.json").string(), *frame.gt_pose);
}

namespace {

ImageD morph_mask(const ImageD& mask, int steps, bool erode) {
  ImageD cur = mask;
  for (int s = 0; s < steps; ++s) {
    ImageD next(cur.height(), cur.width(), 1);
    for (int y = 0; y < cur.height(); ++y)
      for (int x = 0; x < cur.width(); ++x) {
        double v = erode ? 1.0 : 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            double nb = 0.0;  // outside counts as background
            if (yy >= 0 && yy < cur.height() && xx >= 0 && xx < cur.width())
              nb = cur(yy, xx);
            v = erode ? std::min(v, nb) : std::max(v, nb);
          }
        next(y, x) = v;
      }
    cur = next;
  }
  return cur;
}

}  // namespace

Frame synth_frame(const TriangleMesh& mesh, const Pose& pose,
                  const CameraIntrinsics& K, const NoiseSpec& noise,
                  std::uint64_t seed) {
  const TripletD hard = rasterize_hard(pose, K, mesh);
  Frame f;
  f.K = K;
  f.rgb = hard.color;
  f.depth = hard.depth;
  f.mask = hard.silhouette;
  f.gt_pose = pose;

  Rng rng(seed);
  if (noise.intensity_scale != 1.0 || noise.color_std > 0.0) {
    for (int y = 0; y < f.rgb.height(); ++y)
      for (int x = 0; x < f.rgb.width(); ++x)
        for (int c = 0; c < 3; ++c) {
          double v = f.rgb(y, x, c) * noise.intensity_scale;
          if (noise.color_std > 0.0) v += noise.color_std * rng.gaussian();
          f.rgb(y, x, c) = std::min(1.0, std::max(0.0, v));
        }
  }
  if (noise.depth_std > 0.0) {
    for (int y = 0; y < f.depth.height(); ++y)
      for (int x = 0; x < f.depth.width(); ++x)
        if (f.depth(y, x) > 0.0)
          f.depth(y, x) = std::max(
              0.0, f.depth(y, x) + noise.depth_std * rng.gaussian());
  }
  if (noise.mask_erode > 0) f.mask = morph_mask(f.mask, noise.mask_erode, true);
  if (noise.mask_dilate > 0)
    f.mask = morph_mask(f.mask, noise.mask_dilate, false);
  f.validate();
  return f;
}

std::vector<ObjectSpec> load_objects_toml(const std::string& path) {
  const TomlDoc doc = parse_toml_file(path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ObjectSpec> specs;
  for (const std::string& name : doc.sections()) {
    ObjectSpec spec;
    spec.name = name;
    const std::string mesh = doc.get_string(name + ".mesh", "");
    if (mesh.empty())
      throw ParseError(path + ": object " + name + " lacks a mesh key");
    spec.mesh_path = mesh.rfind("builtin:", 0) == 0
                         ? mesh
                         : (base / mesh).string();
    spec.symmetric = doc.get_bool(name + ".symmetric", false);
    if (doc.has(name + ".diameter_mm")) {
      spec.diameter_m = doc.at(name + ".diameter_mm").as_double() * kMmToM;
      if (!(spec.diameter_m > 0))
        throw ParseError(path + ": object " + name +
                         " has non-positive diameter");
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw ParseError(path + ": no object tables");
  return specs;
}

ObjectSpec find_object(const std::vector<ObjectSpec>& specs,
                       const std::string& name) {
  if (name.empty()) {
    if (specs.size() == 1) return specs.front();
    throw InvalidArgumentError(
        "multiple objects in spec file; --object required");
  }
  for (const auto& s : specs)
    if (s.name == name) return s;
  throw NotFoundError("object not found: " + name);
}

Frame crop_frame(const Frame& frame, const PixelRect& rect) {
  Frame out;
  out.rgb = crop(frame.rgb, rect);
  out.depth = crop(frame.depth, rect);
  out.mask = crop(frame.mask, rect);
  out.K = crop_intrinsics(frame.K, rect);
  out.gt_pose = frame.gt_pose;
  return out;
}

}  // namespace posefit
