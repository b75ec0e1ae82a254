#include "posefit/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "posefit/png_io.hpp"
#include "posefit/toml.hpp"

namespace posefit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t trial_seed(std::uint64_t seed, double rot_deg, int trial) {
  Rng r(seed * 0x9E3779B97F4A7C15ULL + std::bit_cast<std::uint64_t>(rot_deg) +
        static_cast<std::uint64_t>(trial) * 0x100000001b3ULL);
  return r.next_u64();
}

json pose_json(const Pose& p) {
  return json{{"q", {p.q().w, p.q().x, p.q().y, p.q().z}},
              {"t_mm", {p.t().x * 1e3, p.t().y * 1e3, p.t().z * 1e3}}};
}

Pose pose_from_json(const json& j, const std::string& where) {
  try {
    const auto q = j.at("q").get<std::vector<double>>();
    const auto t = j.at("t_mm").get<std::vector<double>>();
    if (q.size() != 4 || t.size() != 3)
      throw ParseError(where + ": q needs 4 and t_mm 3 entries");
    return Pose(Quat{q[0], q[1], q[2], q[3]},
                Vec3d{t[0] * 1e-3, t[1] * 1e-3, t[2] * 1e-3});
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

std::map<std::string, Pose> load_pose_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::map<std::string, Pose> out;
  if (j.contains("q") && j.contains("t_mm")) {
    out.emplace(".", pose_from_json(j, path));
    return out;
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    out.emplace(it.key(), pose_from_json(it.value(), path + ":" + it.key()));
  return out;
}

struct LoadedObject {
  ObjectSpec spec;
  TriangleMesh mesh;
};

LoadedObject load_object(const std::string& objects_path,
                         const std::string& name) {
  const auto specs = load_objects_toml(objects_path);
  LoadedObject obj;
  obj.spec = find_object(specs, name);
  obj.mesh = load_mesh(obj.spec.mesh_path);
  if (obj.spec.diameter_m > 0)
    obj.mesh.diameter = obj.spec.diameter_m;  // file override
  else
    obj.spec.diameter_m = obj.mesh.diameter;
  return obj;
}

json config_json(const RunConfig& c) {
  return json{
      {"refine",
       {{"iterations", c.refine.iterations},
        {"lr_q", c.refine.lr_q},
        {"lr_t", c.refine.lr_t},
        {"beta1", c.refine.beta1},
        {"beta2", c.refine.beta2},
        {"patience", c.refine.patience},
        {"min_rel_improvement", c.refine.min_rel_improvement},
        {"snapshot_every", c.refine.snapshot_every},
        {"sigma_anneal", c.refine.sigma_anneal},
        {"roi_dilation", c.refine.roi_dilation}}},
      {"weights",
       {{"alpha", c.refine.weights.alpha},
        {"beta", c.refine.weights.beta},
        {"gamma", c.refine.weights.gamma},
        {"eta", c.refine.weights.eta}}},
      {"render",
       {{"sigma", c.refine.render.sigma},
        {"gamma", c.refine.render.gamma},
        {"background_depth", c.refine.render.background_depth}}},
      {"toggles",
       {{"mask", c.refine.toggles.mask},
        {"ab", c.refine.toggles.ab},
        {"ms_ssim", c.refine.toggles.ms_ssim},
        {"perceptual", c.refine.toggles.perceptual},
        {"geom", c.refine.toggles.geom}}},
      {"noise",
       {{"color_std", c.noise.color_std},
        {"intensity_scale", c.noise.intensity_scale},
        {"depth_std", c.noise.depth_std},
        {"mask_erode", c.noise.mask_erode},
        {"mask_dilate", c.noise.mask_dilate}}},
      {"camera",
       {{"fx", c.camera.fx},
        {"fy", c.camera.fy},
        {"cx", c.camera.cx},
        {"cy", c.camera.cy},
        {"width", c.camera.width},
        {"height", c.camera.height}}},
      {"sweep",
       {{"rot_grid", c.rot_grid},
        {"trials", c.trials},
        {"base_rot_deg", c.base_rot_deg},
        {"base_trans_frac", c.base_trans_frac}}}};
}

struct Manifest {
  json j;
  std::chrono::steady_clock::time_point start;

  Manifest(const std::string& command, const CommonOptions& common,
           const RunConfig& cfg) {
    start = std::chrono::steady_clock::now();
    j["command"] = command;
    j["seed"] = common.seed;
    j["jobs"] = common.jobs;
    j["config"] = config_json(cfg);
    j["inputs"] = json::object();
    j["results"] = json::object();
  }
  void input(const std::string& key, const std::string& path,
             bool digest = true) {
    json entry{{"path", path}};
    if (digest && fs::is_regular_file(path))
      entry["digest"] = file_digest(path);
    j["inputs"][key] = entry;
  }
  void write(const std::string& out_dir) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    j["wall_clock_sec"] = secs;
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    out << j.dump(2) << "\n";
  }
};

void draw_line(ImageD& rgb, double x0, double y0, double x1, double y1,
               const Vec3d& color) {
  const int steps = static_cast<int>(
      std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int x = static_cast<int>(std::lround(x0 + (x1 - x0) * t));
    const int y = static_cast<int>(std::lround(y0 + (y1 - y0) * t));
    if (x < 0 || y < 0 || x >= rgb.width() || y >= rgb.height()) continue;
    rgb(y, x, 0) = color.x;
    rgb(y, x, 1) = color.y;
    rgb(y, x, 2) = color.z;
  }
}

// Projected 3D bounding box of the mesh at `pose`, the overlay style used
// throughout the figures.
void draw_bbox_overlay(ImageD& rgb, const Pose& pose,
                       const CameraIntrinsics& K, const TriangleMesh& mesh,
                       const Vec3d& color) {
  Vec3d lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const auto& v : mesh.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  std::array<Vec3d, 8> corners;
  for (int i = 0; i < 8; ++i)
    corners[i] = {(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y,
                  (i & 4) ? hi.z : lo.z};
  std::array<Vec2d, 8> px;
  std::array<bool, 8> ok{};
  const Mat3d R = pose.rotation();
  for (int i = 0; i < 8; ++i) {
    const Vec3d c = R * corners[i] + pose.t();
    if (c.z <= kZNear) continue;
    px[i] = {K.fx * c.x / c.z + K.cx, K.fy * c.y / c.z + K.cy};
    ok[i] = true;
  }
  static constexpr int edges[12][2] = {{0, 1}, {0, 2}, {1, 3}, {2, 3},
                                       {4, 5}, {4, 6}, {5, 7}, {6, 7},
                                       {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  for (const auto& e : edges)
    if (ok[e[0]] && ok[e[1]])
      draw_line(rgb, px[e[0]].x, px[e[0]].y, px[e[1]].x, px[e[1]].y, color);
}

int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const InvalidArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

struct TrialAggregate {
  double mean_init_rot = 0, mean_init_trans = 0, mean_init_add = 0;
  double mean_final_rot = 0, mean_final_trans = 0, mean_final_add = 0;
  double recovery2 = 0;  // final ADD < 2% diameter
  double recall10 = 0;   // final ADD < 10% diameter
  std::optional<double> rho;
  int trials = 0, failures = 0;
};

TrialAggregate aggregate(const std::vector<TrialOutcome>& outcomes,
                         double diameter) {
  TrialAggregate a;
  a.trials = static_cast<int>(outcomes.size());
  std::vector<double> losses, adds;
  for (const auto& t : outcomes) {
    a.failures += t.failed;
    a.mean_init_rot += t.init_err.rot_err;
    a.mean_init_trans += t.init_err.trans_err;
    a.mean_init_add += t.init_err.add;
    a.mean_final_rot += t.final_err.rot_err;
    a.mean_final_trans += t.final_err.trans_err;
    a.mean_final_add += t.final_err.add;
    a.recovery2 += t.final_err.add < 0.02 * diameter;
    a.recall10 += t.final_err.add < 0.10 * diameter;
    const std::size_t n = std::min(t.loss_curve.size(), t.add_curve.size());
    for (std::size_t i = 0; i < n; ++i) {
      losses.push_back(t.loss_curve[i]);
      adds.push_back(t.add_curve[i]);
    }
  }
  const double n = std::max(1, a.trials);
  a.mean_init_rot /= n;
  a.mean_init_trans /= n;
  a.mean_init_add /= n;
  a.mean_final_rot /= n;
  a.mean_final_trans /= n;
  a.mean_final_add /= n;
  a.recovery2 /= n;
  a.recall10 /= n;
  a.rho = spearman_rho(losses, adds);
  return a;
}

std::vector<TrialOutcome> run_trials(const TriangleMesh& mesh,
                                     const RunConfig& cfg, double rot_deg,
                                     double trans_frac, int trials,
                                     std::uint64_t seed, int jobs) {
  const PyramidFeatureExtractor fx;
  std::vector<TrialOutcome> outcomes(trials);
  parallel_for(trials, jobs, [&](int i) {
    outcomes[i] =
        run_recovery_trial(mesh, cfg.camera, cfg.noise, rot_deg, trans_frac,
                           cfg.refine, trial_seed(seed, rot_deg, i), fx);
  });
  return outcomes;
}

std::string csv_rho(const std::optional<double>& rho) {
  return rho ? fmt(*rho) : "n/a";
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  const TomlDoc doc = parse_toml_file(path);
  RefineConfig& r = c.refine;
  r.iterations = static_cast<int>(doc.get_int("refine.iterations",
                                              r.iterations));
  r.lr_q = doc.get_double("refine.lr_q", r.lr_q);
  r.lr_t = doc.get_double("refine.lr_t", r.lr_t);
  r.beta1 = doc.get_double("refine.beta1", r.beta1);
  r.beta2 = doc.get_double("refine.beta2", r.beta2);
  r.patience = static_cast<int>(doc.get_int("refine.patience", r.patience));
  r.min_rel_improvement =
      doc.get_double("refine.min_rel_improvement", r.min_rel_improvement);
  r.snapshot_every =
      static_cast<int>(doc.get_int("refine.snapshot_every", r.snapshot_every));
  r.sigma_anneal = doc.get_bool("refine.sigma_anneal", r.sigma_anneal);
  r.roi_dilation = doc.get_double("refine.roi_dilation", r.roi_dilation);
  r.weights.alpha = doc.get_double("weights.alpha", r.weights.alpha);
  r.weights.beta = doc.get_double("weights.beta", r.weights.beta);
  r.weights.gamma = doc.get_double("weights.gamma", r.weights.gamma);
  r.weights.eta = doc.get_double("weights.eta", r.weights.eta);
  r.render.sigma = doc.get_double("render.sigma", r.render.sigma);
  r.render.gamma = doc.get_double("render.gamma", r.render.gamma);
  r.render.background_depth =
      doc.get_double("render.background_depth", r.render.background_depth);
  r.toggles.mask = doc.get_bool("toggles.mask", true);
  r.toggles.ab = doc.get_bool("toggles.ab", true);
  r.toggles.ms_ssim = doc.get_bool("toggles.ms_ssim", true);
  r.toggles.perceptual = doc.get_bool("toggles.perceptual", true);
  r.toggles.geom = doc.get_bool("toggles.geom", true);
  c.noise.color_std = doc.get_double("noise.color_std", c.noise.color_std);
  c.noise.intensity_scale =
      doc.get_double("noise.intensity_scale", c.noise.intensity_scale);
  c.noise.depth_std = doc.get_double("noise.depth_std", c.noise.depth_std);
  c.noise.mask_erode =
      static_cast<int>(doc.get_int("noise.mask_erode", c.noise.mask_erode));
  c.noise.mask_dilate =
      static_cast<int>(doc.get_int("noise.mask_dilate", c.noise.mask_dilate));
  c.camera.fx = doc.get_double("camera.fx", c.camera.fx);
  c.camera.fy = doc.get_double("camera.fy", c.camera.fy);
  c.camera.cx = doc.get_double("camera.cx", c.camera.cx);
  c.camera.cy = doc.get_double("camera.cy", c.camera.cy);
  c.camera.width = static_cast<int>(doc.get_int("camera.width",
                                                c.camera.width));
  c.camera.height =
      static_cast<int>(doc.get_int("camera.height", c.camera.height));
  if (doc.has("sweep.rot_grid")) c.rot_grid = doc.at("sweep.rot_grid").as_array();
  c.trials = static_cast<int>(doc.get_int("sweep.trials", c.trials));
  c.base_rot_deg = doc.get_double("sweep.base_rot_deg", c.base_rot_deg);
  c.base_trans_frac =
      doc.get_double("sweep.base_trans_frac", c.base_trans_frac);
  return c;
}

std::string run_config_to_json(const RunConfig& cfg) {
  return config_json(cfg).dump(2);
}

int cmd_refine(const RefineArgs& args) {
  return guard([&]() {
    const RunConfig cfg = load_run_config(args.common.config_path);
    const LoadedObject obj = load_object(args.objects_path, args.object_name);

    // Collect frames: subdirectories with rgb.png, or the directory itself.
    std::vector<std::string> names;
    const fs::path root(args.frames_dir);
    if (!fs::exists(root)) throw NotFoundError(args.frames_dir);
    if (fs::exists(root / "rgb.png")) {
      names.push_back(".");
    } else {
      for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "rgb.png"))
          names.push_back(entry.path().filename().string());
      std::sort(names.begin(), names.end());
    }
    if (names.empty())
      throw InvalidArgumentError("no frames found in " + args.frames_dir);

    const auto init_poses = load_pose_map(args.init_poses_path);

    Manifest manifest("refine", args.common, cfg);
    manifest.input("objects", args.objects_path);
    manifest.input("init_poses", args.init_poses_path);
    manifest.input("frames", args.frames_dir, false);
    if (!args.common.config_path.empty())
      manifest.input("config", args.common.config_path);

    struct FrameResult {
      json j;
      bool failed = false;
    };
    std::vector<FrameResult> results(names.size());
    const PyramidFeatureExtractor fx;

    parallel_for(static_cast<int>(names.size()), args.common.jobs, [&](int i) {
      const std::string& name = names[i];
      FrameResult& res = results[i];
      res.j["frame"] = name;
      try {
        const fs::path frame_dir =
            name == "." ? root : root / name;
        const Frame frame = load_frame(frame_dir.string());
        const auto it = init_poses.find(name);
        if (it == init_poses.end())
          throw NotFoundError("no init pose for frame " + name);
        const RefineTrace trace =
            refine_pose(frame, obj.mesh, it->second, cfg.refine, fx);

        const fs::path out_dir = fs::path(args.common.out_dir) /
                                 (name == "." ? "frame" : name);
        fs::create_directories(out_dir);
        save_pose_json((out_dir / "pose_refined.json").string(),
                       trace.final_pose);
        std::ofstream csv(out_dir / "loss_curve.csv");
        csv << "iter,mask,ab,ms_ssim,perceptual,visual,geom,total,add\n";
        for (std::size_t k = 0; k < trace.iterations.size(); ++k) {
          const LossBreakdown& bd = trace.iterations[k];
          csv << k << ',' << fmt(bd.mask) << ',' << fmt(bd.ab) << ','
              << fmt(bd.ms_ssim) << ',' << fmt(bd.perceptual) << ','
              << fmt(bd.visual) << ',' << fmt(bd.geom) << ','
              << fmt(bd.total);
          csv << ',';
          if (frame.gt_pose) {
            // Snapshot poses are sparse; report ADD at snapshots only.
            for (const auto& [iter, pose] : trace.snapshots)
              if (iter == static_cast<int>(k)) {
                csv << fmt(add_metric(pose, *frame.gt_pose, obj.mesh));
                break;
              }
          }
          csv << '\n';
        }
        res.j["converged"] = trace.converged;
        res.j["iterations"] = trace.iterations.size();
        res.j["final_total"] = trace.final_total;
        res.j["pose_refined"] = pose_json(trace.final_pose);
        if (frame.gt_pose) {
          const auto init_err = pose_error_report(it->second, *frame.gt_pose,
                                                  obj.mesh,
                                                  obj.spec.symmetric);
          const auto fin_err =
              pose_error_report(trace.final_pose, *frame.gt_pose, obj.mesh,
                                obj.spec.symmetric);
          res.j["init_add"] = init_err.add;
          res.j["final_add"] = fin_err.add;
          res.j["final_rot_err"] = fin_err.rot_err;
          res.j["final_trans_err"] = fin_err.trans_err;
          res.j["recall_hit"] = fin_err.add_recall_hit;
        }
        if (args.overlays) {
          ImageD overlay = frame.rgb;
          if (frame.gt_pose)
            draw_bbox_overlay(overlay, *frame.gt_pose, frame.K, obj.mesh,
                              {0.2, 0.35, 1.0});
          draw_bbox_overlay(overlay, it->second, frame.K, obj.mesh,
                            {1.0, 0.2, 0.2});
          draw_bbox_overlay(overlay, trace.final_pose, frame.K, obj.mesh,
                            {0.2, 1.0, 0.2});
          write_png_rgb8((out_dir / "overlay.png").string(), overlay);
        }
      } catch (const Error& e) {
        res.failed = true;
        res.j["error"] = e.what();
      }
    });

    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      failures += results[i].failed;
      manifest.j["results"][names[i]] = results[i].j;
    }
    manifest.j["failures"] = failures;
    manifest.write(args.common.out_dir);
    std::cout << "refined " << names.size() - failures << "/" << names.size()
              << " frames -> " << args.common.out_dir << "\n";
    return failures == static_cast<int>(names.size()) ? kExitAllFailed
                                                      : kExitOk;
  });
}

int cmd_sweep(const SweepArgs& args) {
  return guard([&]() {
    const RunConfig cfg = load_run_config(args.common.config_path);
    if (cfg.rot_grid.empty())
      throw InvalidArgumentError("sweep grid is empty");
    const LoadedObject obj = load_object(args.objects_path, args.object_name);

    Manifest manifest("sweep", args.common, cfg);
    manifest.input("objects", args.objects_path);
    if (!args.common.config_path.empty())
      manifest.input("config", args.common.config_path);

    fs::create_directories(args.common.out_dir);
    std::ofstream csv(fs::path(args.common.out_dir) / "sweep.csv");
    csv << "rot_deg,trans_frac,trials,failures,mean_init_rot,mean_init_trans,"
           "mean_init_add,mean_final_rot,mean_final_trans,mean_final_add,"
           "recovery2,recall10,spearman_rho\n";
    std::ofstream traj(fs::path(args.common.out_dir) / "loss_trajectory.csv");
    traj << "rot_deg,iter,mean_total,mean_add\n";

    std::vector<double> all_losses, all_adds;
    for (double rot : cfg.rot_grid) {
      const double trans_frac =
          cfg.base_rot_deg > 0 ? cfg.base_trans_frac * rot / cfg.base_rot_deg
                               : cfg.base_trans_frac;
      const auto outcomes = run_trials(obj.mesh, cfg, rot, trans_frac,
                                       cfg.trials, args.common.seed,
                                       args.common.jobs);
      const TrialAggregate agg = aggregate(outcomes, obj.mesh.diameter);
      csv << fmt(rot) << ',' << fmt(trans_frac) << ',' << agg.trials << ','
          << agg.failures << ',' << fmt(agg.mean_init_rot) << ','
          << fmt(agg.mean_init_trans) << ',' << fmt(agg.mean_init_add) << ','
          << fmt(agg.mean_final_rot) << ',' << fmt(agg.mean_final_trans)
          << ',' << fmt(agg.mean_final_add) << ',' << fmt(agg.recovery2)
          << ',' << fmt(agg.recall10) << ',' << csv_rho(agg.rho) << '\n';

      std::size_t max_iters = 0;
      for (const auto& t : outcomes)
        max_iters = std::max(max_iters, t.loss_curve.size());
      for (std::size_t k = 0; k < max_iters; ++k) {
        double sum_l = 0, sum_a = 0;
        int n = 0;
        for (const auto& t : outcomes)
          if (k < t.loss_curve.size() && k < t.add_curve.size()) {
            sum_l += t.loss_curve[k];
            sum_a += t.add_curve[k];
            ++n;
          }
        if (n > 0)
          traj << fmt(rot) << ',' << k << ',' << fmt(sum_l / n) << ','
               << fmt(sum_a / n) << '\n';
      }
      for (const auto& t : outcomes) {
        const std::size_t n = std::min(t.loss_curve.size(),
                                       t.add_curve.size());
        for (std::size_t i = 0; i < n; ++i) {
          all_losses.push_back(t.loss_curve[i]);
          all_adds.push_back(t.add_curve[i]);
        }
      }
      manifest.j["results"][fmt(rot)] = {
          {"recovery2", agg.recovery2},
          {"recall10", agg.recall10},
          {"mean_final_add", agg.mean_final_add},
          {"failures", agg.failures}};
    }
    const auto overall = spearman_rho(all_losses, all_adds);
    manifest.j["results"]["overall_spearman_rho"] =
        overall ? json(*overall) : json(nullptr);
    manifest.write(args.common.out_dir);
    std::cout << "sweep complete; overall spearman rho = "
              << csv_rho(overall) << "\n";
    return kExitOk;
  });
}

int cmd_ablate(const AblateArgs& args) {
  return guard([&]() {
    const RunConfig cfg = load_run_config(args.common.config_path);
    const LoadedObject obj = load_object(args.objects_path, args.object_name);
    std::vector<std::string> terms = args.disable;
    if (terms.empty())
      terms = {"mask", "ab", "ms-ssim", "perceptual", "geom"};
    for (const auto& t : terms)
      if (t != "mask" && t != "ab" && t != "ms-ssim" && t != "perceptual" &&
          t != "geom")
        throw InvalidArgumentError("unknown loss term: " + t);

    Manifest manifest("ablate", args.common, cfg);
    manifest.input("objects", args.objects_path);
    if (!args.common.config_path.empty())
      manifest.input("config", args.common.config_path);

    fs::create_directories(args.common.out_dir);
    std::ofstream csv(fs::path(args.common.out_dir) / "ablate.csv");
    csv << "config,trials,failures,recovery2,recall10,mean_final_add,"
           "mean_final_rot,mean_final_trans,spearman_rho\n";

    auto run_config = [&](const std::string& label, const LossToggles& tg) {
      RunConfig c = cfg;
      c.refine.toggles = tg;
      if (!tg.any())
        throw InvalidArgumentError("all loss terms disabled");
      const auto outcomes =
          run_trials(obj.mesh, c, cfg.base_rot_deg, cfg.base_trans_frac,
                     cfg.trials, args.common.seed, args.common.jobs);
      const TrialAggregate agg = aggregate(outcomes, obj.mesh.diameter);
      csv << label << ',' << agg.trials << ',' << agg.failures << ','
          << fmt(agg.recovery2) << ',' << fmt(agg.recall10) << ','
          << fmt(agg.mean_final_add) << ',' << fmt(agg.mean_final_rot) << ','
          << fmt(agg.mean_final_trans) << ',' << csv_rho(agg.rho) << '\n';
      manifest.j["results"][label] = {{"recovery2", agg.recovery2},
                                      {"recall10", agg.recall10},
                                      {"failures", agg.failures}};
      return agg;
    };

    run_config("full", cfg.refine.toggles);
    for (const std::string& term : terms) {
      LossToggles tg = cfg.refine.toggles;
      if (term == "mask") tg.mask = false;
      if (term == "ab") tg.ab = false;
      if (term == "ms-ssim") tg.ms_ssim = false;
      if (term == "perceptual") tg.perceptual = false;
      if (term == "geom") tg.geom = false;
      run_config("no_" + term, tg);
    }
    manifest.write(args.common.out_dir);
    std::cout << "ablation table -> " << args.common.out_dir
              << "/ablate.csv\n";
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args) {
  return guard([&]() {
    const RunConfig cfg = load_run_config(args.common.config_path);
    const LoadedObject obj = load_object(args.objects_path, args.object_name);
    const auto poses = load_pose_map(args.poses_path);
    const auto gts = load_pose_map(args.gt_poses_path);
    if (poses.size() != gts.size())
      throw InvalidArgumentError("pose/gt list length mismatch");
    for (const auto& [name, p] : poses)
      if (!gts.count(name))
        throw InvalidArgumentError("gt pose missing for " + name);

    Manifest manifest("evaluate", args.common, cfg);
    manifest.input("objects", args.objects_path);
    manifest.input("poses", args.poses_path);
    manifest.input("gt_poses", args.gt_poses_path);

    fs::create_directories(args.common.out_dir);
    std::ofstream csv(fs::path(args.common.out_dir) / "evaluate.csv");
    csv << "frame,add,add_s,rot_err,trans_err,recall_hit\n";
    std::vector<PoseErrorReport> reports;
    double sum_add = 0, sum_rot = 0, sum_trans = 0;
    for (const auto& [name, p] : poses) {
      const PoseErrorReport r =
          pose_error_report(p, gts.at(name), obj.mesh, obj.spec.symmetric);
      reports.push_back(r);
      sum_add += r.add;
      sum_rot += r.rot_err;
      sum_trans += r.trans_err;
      csv << name << ',' << fmt(r.add) << ',' << fmt(r.add_s) << ','
          << fmt(r.rot_err) << ',' << fmt(r.trans_err) << ','
          << (r.add_recall_hit ? 1 : 0) << '\n';
    }
    const double recall =
        recall_at_threshold(reports, obj.mesh, obj.spec.symmetric);
    const double n = static_cast<double>(reports.size());
    manifest.j["results"] = {{"recall", recall},
                             {"mean_add", sum_add / n},
                             {"mean_rot_err", sum_rot / n},
                             {"mean_trans_err", sum_trans / n},
                             {"frames", reports.size()}};
    manifest.write(args.common.out_dir);
    std::cout << "recall=" << fmt(recall) << " mean_add=" << fmt(sum_add / n)
              << " mean_rot_err=" << fmt(sum_rot / n)
              << " mean_trans_err=" << fmt(sum_trans / n) << "\n";
    return kExitOk;
  });
}

int cmd_synth(const SynthArgs& args) {
  return guard([&]() {
    if (args.count < 1)
      throw InvalidArgumentError("synth count must be >= 1");
    const RunConfig cfg = load_run_config(args.common.config_path);
    const LoadedObject obj = load_object(args.objects_path, args.object_name);

    Manifest manifest("synth", args.common, cfg);
    manifest.input("objects", args.objects_path);

    for (int i = 0; i < args.count; ++i) {
      const std::uint64_t s = trial_seed(args.common.seed, 0.0, i);
      Rng rng(s);
      const Pose gt = sample_scene_pose(obj.mesh, cfg.camera, rng);
      const Frame frame =
          synth_frame(obj.mesh, gt, cfg.camera, cfg.noise, rng.next_u64());
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%03d", i);
      save_frame((fs::path(args.common.out_dir) / name).string(), frame);
      manifest.j["results"][name] = pose_json(gt);
    }
    manifest.write(args.common.out_dir);
    std::cout << "wrote " << args.count << " synthetic frame(s) -> "
              << args.common.out_dir << "\n";
    return kExitOk;
  });
}

int cmd_render(const RenderArgs& args) {
  return guard([&]() {
    const RunConfig cfg = load_run_config(args.common.config_path);
    const LoadedObject obj = load_object(args.objects_path, args.object_name);
    Pose pose;
    if (!args.pose_path.empty()) {
      pose = load_pose_json(args.pose_path);
    } else {
      const double z = obj.mesh.diameter * cfg.camera.fx / 90.0;
      pose = Pose(Quat{1, 0, 0, 0}, Vec3d{0, 0, z});
    }

    Manifest manifest("render", args.common, cfg);
    manifest.input("objects", args.objects_path);
    if (!args.pose_path.empty()) manifest.input("pose", args.pose_path);

    TripletD triplet;
    if (args.soft) {
      RenderConfig rc = cfg.refine.render;
      rc.sigma = 1e-6;  // near-hard preview
      triplet = render(pose, cfg.camera, obj.mesh, rc);
    } else {
      triplet = rasterize_hard(pose, cfg.camera, obj.mesh);
    }
    fs::create_directories(args.common.out_dir);
    const fs::path out(args.common.out_dir);
    write_png_rgb8((out / "render.png").string(), triplet.color);
    write_png_gray8((out / "silhouette.png").string(), triplet.silhouette);
    ImageD overlay = triplet.color;
    draw_bbox_overlay(overlay, pose, cfg.camera, obj.mesh, {0.2, 1.0, 0.2});
    write_png_rgb8((out / "overlay.png").string(), overlay);
    manifest.j["results"]["pose"] = pose_json(pose);
    manifest.write(args.common.out_dir);
    std::cout << "render -> " << args.common.out_dir << "\n";
    return kExitOk;
  });
}

int cmd_grad_check(const GradCheckArgs& args) {
  return guard([&]() {
    const RunConfig cfg = load_run_config(args.common.config_path);
    const LoadedObject obj = load_object(args.objects_path, args.object_name);
    const Frame frame = load_frame(args.frame_dir);
    Pose pose;
    if (!args.pose_path.empty())
      pose = load_pose_json(args.pose_path);
    else if (frame.gt_pose)
      pose = *frame.gt_pose;
    else
      throw InvalidArgumentError(
          "no pose: give --pose or a frame with pose_gt.json");

    Manifest manifest("grad-check", args.common, cfg);
    manifest.input("objects", args.objects_path);
    manifest.input("frame", args.frame_dir, false);

    const GradCheckReport report =
        grad_check(frame, obj.mesh, pose, cfg.refine);
    static const char* kParamNames[7] = {"qw", "qx", "qy", "qz",
                                         "tx", "ty", "tz"};
    fs::create_directories(args.common.out_dir);
    std::ofstream csv(fs::path(args.common.out_dir) / "grad_check.csv");
    csv << "param,analytic,numeric,rel_err,abs_err\n";
    std::printf("%-4s %22s %22s %12s\n", "par", "analytic", "numeric",
                "rel_err");
    for (int k = 0; k < 7; ++k) {
      const GradCheckRow& r = report.rows[k];
      csv << kParamNames[k] << ',' << fmt(r.analytic) << ',' << fmt(r.numeric)
          << ',' << fmt(r.rel_err) << ',' << fmt(r.abs_err) << '\n';
      std::printf("%-4s %22.12g %22.12g %12.4g\n", kParamNames[k], r.analytic,
                  r.numeric, r.rel_err);
    }
    manifest.j["results"]["max_rel_err"] = report.max_rel_err;
    manifest.write(args.common.out_dir);
    return kExitOk;
  });
}

}  // namespace posefit::cli
