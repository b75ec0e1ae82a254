#include "posefit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

namespace posefit {

CameraIntrinsics default_synth_camera() {
  CameraIntrinsics K;
  K.fx = K.fy = 350.0;
  K.cx = 96.0;
  K.cy = 80.0;
  K.width = 192;
  K.height = 160;
  return K;
}

Pose sample_scene_pose(const TriangleMesh& mesh, const CameraIntrinsics& K,
                       Rng& rng) {
  // Uniform orientation from four normals.
  Quat q{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
  if (norm(q) < 1e-6) q = Quat{1, 0, 0, 0};
  // Distance such that the projected diameter is ~90 px.
  const double z =
      mesh.diameter * K.fx / 90.0 * rng.uniform(0.95, 1.10);
  const Vec3d t{rng.uniform(-0.02, 0.02) * z, rng.uniform(-0.02, 0.02) * z,
                z};
  return Pose(q, t);
}

TrialOutcome run_recovery_trial(const TriangleMesh& mesh,
                                const CameraIntrinsics& K,
                                const NoiseSpec& noise, double rot_deg,
                                double trans_frac, const RefineConfig& cfg,
                                std::uint64_t trial_seed,
                                const FeatureExtractor& fx) {
  TrialOutcome out;
  Rng seeder(trial_seed);
  const std::uint64_t scene_seed = seeder.next_u64();
  const std::uint64_t perturb_seed = seeder.next_u64();
  const std::uint64_t noise_seed = seeder.next_u64();

  Rng scene_rng(scene_seed);
  const Pose gt = sample_scene_pose(mesh, K, scene_rng);
  const Pose init =
      perturb_pose(gt, rot_deg, trans_frac, mesh.diameter, perturb_seed);

  try {
    const Frame frame = synth_frame(mesh, gt, K, noise, noise_seed);
    RefineConfig trial_cfg = cfg;
    trial_cfg.snapshot_every = 1;  // per-iteration poses for the ADD curve
    const RefineTrace trace = refine_pose(frame, mesh, init, trial_cfg, fx);

    out.init_err = pose_error_report(init, gt, mesh, false);
    out.final_err = pose_error_report(trace.final_pose, gt, mesh, false);
    out.converged = trace.converged;
    out.iterations = static_cast<int>(trace.iterations.size());
    out.loss_curve.reserve(trace.iterations.size());
    for (const auto& bd : trace.iterations) out.loss_curve.push_back(bd.total);
    out.add_curve.reserve(trace.snapshots.size());
    for (const auto& [iter, pose] : trace.snapshots)
      out.add_curve.push_back(add_metric(pose, gt, mesh));
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
    out.init_err = pose_error_report(init, gt, mesh, false);
    out.final_err = out.init_err;
  }
  return out;
}

std::optional<double> spearman_rho(std::vector<double> a,
                                   std::vector<double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) return std::nullopt;
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + j) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double mean = (n + 1) / 2.0;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  if (da <= 0 || db <= 0) return std::nullopt;
  return num / std::sqrt(da * db);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0)
    jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

}  // namespace posefit
