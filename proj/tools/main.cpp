#include <CLI11.hpp>

#include "posefit/cli.hpp"

namespace cli = posefit::cli;

namespace {

void add_common(CLI::App* cmd, cli::CommonOptions& common) {
  cmd->add_option("--config", common.config_path, "TOML config file");
  cmd->add_option("--seed", common.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", common.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--jobs", common.jobs,
                  "worker threads (0 = all cores)")
      ->capture_default_str();
}

void add_object(CLI::App* cmd, std::string& objects, std::string& name) {
  cmd->add_option("--objects", objects, "objects.toml path")->required();
  cmd->add_option("--object", name,
                  "object name (optional when the file has one entry)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "posefit: differentiable render-and-compare 6D pose refinement"};
  app.require_subcommand(1);

  cli::RefineArgs refine;
  CLI::App* c_refine = app.add_subcommand(
      "refine", "refine per-frame poses against RGB-D observations");
  add_common(c_refine, refine.common);
  add_object(c_refine, refine.objects_path, refine.object_name);
  c_refine->add_option("--frames", refine.frames_dir,
                       "directory of frame subdirectories")->required();
  c_refine->add_option("--init", refine.init_poses_path,
                       "JSON file of initial poses per frame")->required();
  c_refine->add_flag("--overlays", refine.overlays,
                     "write 3D bounding-box overlay images");

  cli::SweepArgs sweep;
  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "synthetic perturbation sweep with recovery statistics");
  add_common(c_sweep, sweep.common);
  add_object(c_sweep, sweep.objects_path, sweep.object_name);

  cli::AblateArgs ablate;
  CLI::App* c_ablate = app.add_subcommand(
      "ablate", "per-term ablation of the alignment objective");
  add_common(c_ablate, ablate.common);
  add_object(c_ablate, ablate.objects_path, ablate.object_name);
  c_ablate->add_option("--disable", ablate.disable,
                       "terms to ablate (default: each of mask, ab, ms-ssim, "
                       "perceptual, geom)");

  cli::EvaluateArgs evaluate;
  CLI::App* c_eval = app.add_subcommand(
      "evaluate", "score predicted poses against ground truth");
  add_common(c_eval, evaluate.common);
  add_object(c_eval, evaluate.objects_path, evaluate.object_name);
  c_eval->add_option("--poses", evaluate.poses_path, "predicted poses JSON")
      ->required();
  c_eval->add_option("--gt", evaluate.gt_poses_path, "ground-truth poses JSON")
      ->required();

  cli::SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand(
      "synth", "generate synthetic RGB-D frames of an object");
  add_common(c_synth, synth.common);
  add_object(c_synth, synth.objects_path, synth.object_name);
  c_synth->add_option("--count", synth.count, "number of frames")
      ->capture_default_str();

  cli::RenderArgs render;
  CLI::App* c_render =
      app.add_subcommand("render", "debug render with a 3D box overlay");
  add_common(c_render, render.common);
  add_object(c_render, render.objects_path, render.object_name);
  c_render->add_option("--pose", render.pose_path, "pose JSON file");
  c_render->add_flag("--soft", render.soft, "near-hard soft render");

  cli::GradCheckArgs gc;
  CLI::App* c_gc = app.add_subcommand(
      "grad-check", "compare analytic pose gradients to finite differences");
  add_common(c_gc, gc.common);
  add_object(c_gc, gc.objects_path, gc.object_name);
  c_gc->add_option("--frame", gc.frame_dir, "frame directory")->required();
  c_gc->add_option("--pose", gc.pose_path,
                   "pose JSON (default: the frame's ground truth)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  if (c_refine->parsed()) return cli::cmd_refine(refine);
  if (c_sweep->parsed()) return cli::cmd_sweep(sweep);
  if (c_ablate->parsed()) return cli::cmd_ablate(ablate);
  if (c_eval->parsed()) return cli::cmd_evaluate(evaluate);
  if (c_synth->parsed()) return cli::cmd_synth(synth);
  if (c_render->parsed()) return cli::cmd_render(render);
  if (c_gc->parsed()) return cli::cmd_grad_check(gc);
  return cli::kExitUsage;
}
