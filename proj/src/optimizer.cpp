#include "posefit/optimizer.hpp"

#include <cmath>

namespace posefit {

PixelRect compute_roi(const Frame& frame, const TriangleMesh& mesh,
                      const Pose& pose, const RefineConfig& cfg) {
  PixelRect box = mask_bbox(frame.mask);
  try {
    box = union_rect(box, projected_bbox(pose, frame.K, mesh));
  } catch (const BehindCameraError&) {
    // Keep the observed box; the init render will fail and be reported.
  }
  return dilate_rect(box, cfg.roi_dilation, frame.K.width, frame.K.height);
}

namespace {

struct Objective {
  const Frame& roi_frame;
  const TriangleMesh& mesh;
  const RefineConfig& cfg;
  const LossContext& ctx;
  RenderConfig rcfg;

  LossBreakdown with_grad(const Pose& p) const {
    return ctx.total(render_with_grad(p, roi_frame.K, mesh, rcfg),
                     cfg.weights, cfg.toggles);
  }
  double value_at(const std::array<double, 7>& params) const {
    const Pose p = Pose::from_params(params);
    return ctx
        .total(render(p, roi_frame.K, mesh, rcfg), cfg.weights, cfg.toggles)
        .total;
  }
};

}  // namespace

RefineTrace refine_pose(const Frame& frame, const TriangleMesh& mesh,
                        const Pose& init, const RefineConfig& cfg,
                        const FeatureExtractor& fx) {
  cfg.validate();
  frame.validate();
  mesh.validate();
  if (!(init.t().z > kZNear))
    throw InitFailureError("initial pose behind the near plane");

  RefineTrace trace;
  // Build ROI-cropped frame and cache observation constants; any failure
  // here is an init failure by definition.
  Frame roi_frame;
  std::unique_ptr<LossContext> ctx;
  try {
    trace.roi = compute_roi(frame, mesh, init, cfg);
    roi_frame = crop_frame(frame, trace.roi);
    ctx = std::make_unique<LossContext>(roi_frame, fx, cfg.toggles);
  } catch (const Error& e) {
    throw InitFailureError(std::string("cannot set up objective: ") +
                           e.what());
  }
  RenderConfig active_render = cfg.render;
  active_render.crop.reset();  // roi_frame.K already describes the crop
  auto eval_grad = [&](const Pose& p) {
    return ctx->total(render_with_grad(p, roi_frame.K, mesh, active_render),
                      cfg.weights, cfg.toggles);
  };

  LossBreakdown current;
  Pose pose = init;
  try {
    current = eval_grad(pose);
  } catch (const Error& e) {
    throw InitFailureError(std::string("objective failed at init: ") +
                           e.what());
  }

  double lr_q = cfg.lr_q, lr_t = cfg.lr_t;
  std::array<double, 7> m{}, v{};
  int halvings = 0;
  int stall = 0;
  Pose best_pose = pose;
  double best_total = current.total;
  int best_iter = 0;
  bool aborted = false;

  Pose prev_pose = pose;
  int adam_step = 0;
  bool annealed = false;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    if (cfg.sigma_anneal && iter >= 100 && !annealed) {
      active_render.sigma *= 0.5;
      annealed = true;
    }

    if (iter > 0) {
      bool ok = true;
      try {
        current = eval_grad(pose);
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) {
        // Reject the step that got us here and try again more cautiously.
        pose = prev_pose;
        lr_q *= 0.5;
        lr_t *= 0.5;
        if (++halvings > 5) {
          aborted = true;
          break;
        }
        --iter;  // retry this iteration from the restored pose
        continue;
      }
    }

    trace.iterations.push_back(current);
    if (iter % cfg.snapshot_every == 0) trace.snapshots.emplace_back(iter, pose);

    if (current.total < best_total * (1.0 - cfg.min_rel_improvement)) {
      stall = 0;
    } else {
      ++stall;
    }
    if (current.total < best_total) {
      best_total = current.total;
      best_pose = pose;
      best_iter = iter;
    }
    if (stall >= cfg.patience) break;

    // Adaptive-moment update with bias correction.
    ++adam_step;
    std::array<double, 7> params = pose.params();
    const double bc1 = 1.0 - std::pow(cfg.beta1, adam_step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, adam_step);
    for (int k = 0; k < 7; ++k) {
      const double g = current.grad_total[k];
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      const double lr = k < 4 ? lr_q : lr_t;
      params[k] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
    prev_pose = pose;
    bool step_ok = params[6] > kZNear;
    if (step_ok) {
      const double qn = std::sqrt(params[0] * params[0] +
                                  params[1] * params[1] +
                                  params[2] * params[2] +
                                  params[3] * params[3]);
      step_ok = qn > 1e-12;
    }
    if (!step_ok) {
      lr_q *= 0.5;
      lr_t *= 0.5;
      if (++halvings > 5) {
        aborted = true;
        break;
      }
      continue;  // keep previous pose, retry with smaller steps
    }
    pose = Pose::from_params(params);  // renormalizes q
  }

  trace.final_pose = best_pose;
  trace.final_total = best_total;
  trace.best_iteration = best_iter;
  trace.converged = !aborted;
  return trace;
}

RefineTrace refine_pose(const Frame& frame, const TriangleMesh& mesh,
                        const Pose& init, const RefineConfig& cfg) {
  const PyramidFeatureExtractor fx;
  return refine_pose(frame, mesh, init, cfg, fx);
}

GradCheckReport grad_check(const Frame& frame, const TriangleMesh& mesh,
                           const Pose& pose, const RefineConfig& cfg,
                           const FeatureExtractor& fx) {
  cfg.validate();
  frame.validate();
  const PixelRect roi = compute_roi(frame, mesh, pose, cfg);
  const Frame roi_frame = crop_frame(frame, roi);
  const LossContext ctx(roi_frame, fx, cfg.toggles);
  RenderConfig rcfg = cfg.render;
  rcfg.crop.reset();
  const Objective objective{roi_frame, mesh, cfg, ctx, rcfg};

  GradCheckReport report;
  const LossBreakdown analytic = objective.with_grad(pose);
  const double h = 1e-4;
  for (int k = 0; k < 7; ++k) {
    std::array<double, 7> lo = pose.params(), hi = pose.params();
    lo[k] -= h;
    hi[k] += h;
    const double numeric =
        (objective.value_at(hi) - objective.value_at(lo)) / (2.0 * h);
    GradCheckRow& row = report.rows[k];
    row.analytic = analytic.grad_total[k];
    row.numeric = numeric;
    row.abs_err = std::abs(row.analytic - numeric);
    const double scale = std::max(std::abs(row.analytic), std::abs(numeric));
    row.rel_err = scale > 0 ? row.abs_err / scale : 0.0;
    report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
  }
  return report;
}

GradCheckReport grad_check(const Frame& frame, const TriangleMesh& mesh,
                           const Pose& pose, const RefineConfig& cfg) {
  const PyramidFeatureExtractor fx;
  return grad_check(frame, mesh, pose, cfg, fx);
}

}  // namespace posefit
