// Copyright 2026 The striker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "striker/diagnostics.hpp"
#include "striker/evalkit.hpp"
#include "striker/pipeline.hpp"
#include "striker/svg.hpp"
#include "striker/trajectory_log.hpp"

namespace {

using namespace striker;

// Exit codes: 0 success, 2 config/usage, 3 missing prerequisite, 4 numerical
// abort, 5 a diagnostic check failed, 1 anything else.
enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfigError = 2,
  kPrerequisiteError = 3,
  kNumericalError = 4,
  kCheckFailed = 5,
};

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  std::string out_dir = "runs";
  int workers = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "JSON config file");
  cmd->add_option("--set", opts->overrides, "config override key=value (repeatable)");
  cmd->add_option("--seed", opts->seed, "master seed (default 0, env STRIKER_SEED)");
  cmd->add_option("--out", opts->out_dir, "output directory (default runs, env STRIKER_OUT)");
  cmd->add_option("--workers", opts->workers, "worker threads (default: available parallelism)");
  cmd->add_flag("--quiet", opts->quiet, "suppress progress lines");
}

config::Config make_config(const CommonOpts& opts) {
  config::Config cfg =
      opts.config_path.empty() ? config::default_config() : config::load_file(opts.config_path);
  config::apply_overrides(cfg, opts.overrides);
  if (opts.workers > 0) cfg.workers = opts.workers;
  return cfg;
}

void apply_env(CommonOpts& opts, bool seed_set, bool out_set) {
  if (!seed_set) {
    if (const char* s = std::getenv("STRIKER_SEED")) opts.seed = std::strtoull(s, nullptr, 10);
  }
  if (!out_set) {
    if (const char* s = std::getenv("STRIKER_OUT")) opts.out_dir = s;
  }
}

net::ParamBundle<float> load_policy(const std::string& path) {
  const pipeline::Checkpoint ckpt = pipeline::load_checkpoint(path);
  return ckpt.params;
}

int cmd_train_stage(const CommonOpts& opts, int stage, const std::string& in_ckpt,
                    const std::string& out_ckpt, const pipeline::AdaptAlgo& adapt) {
  pipeline::StageRunConfig run;
  run.stage = stage;
  run.cfg = make_config(opts);
  run.seed = opts.seed;
  run.quiet = opts.quiet;
  std::filesystem::create_directories(opts.out_dir);
  const std::string base = opts.out_dir + "/stage" + std::to_string(stage);
  run.in_checkpoint = in_ckpt;
  if (in_ckpt.empty() && stage > 1) {
    run.in_checkpoint = opts.out_dir + "/stage" + std::to_string(stage - 1) + ".ckpt";
  }
  run.out_checkpoint = out_ckpt.empty() ? base + ".ckpt" : out_ckpt;
  run.stats_path = base + "_stats.jsonl";
  run.adapt = adapt;
  const pipeline::Checkpoint ckpt = pipeline::run_stage(run);
  std::printf("stage %d done: %s (cumulative env steps %llu)\n", stage,
              run.out_checkpoint.c_str(), static_cast<unsigned long long>(ckpt.cumulative_steps));
  return kOk;
}

int cmd_eval(const CommonOpts& opts, const std::string& ckpt_path, int trials, int record) {
  config::Config cfg = make_config(opts);
  if (trials > 0) cfg.eval_trials = trials;
  const net::ParamBundle<float> policy = load_policy(ckpt_path);

  evalkit::EvalConfig ecfg;
  ecfg.trials = cfg.eval_trials;
  ecfg.horizon_steps = cfg.eval_horizon_steps;
  ecfg.stop_on_success = cfg.eval_stop_on_success;
  ecfg.workers = cfg.workers;
  std::filesystem::create_directories(opts.out_dir);
  if (record > 0) {
    ecfg.record_dir = opts.out_dir + "/trajectories";
    ecfg.record_limit = record;
    std::filesystem::create_directories(ecfg.record_dir);
  }
  pipeline::EnvSettings env = cfg.env_settings(world::Stage::kKick);
  env.perception_enabled = policy.kind == net::ArchKind::kStudent;

  evalkit::EvalSummary summary;
  const evalkit::MetricsGrid grid = evalkit::evaluate_grid(policy, env, ecfg, opts.seed, &summary);
  evalkit::emit_outputs(grid, summary, opts.out_dir);
  std::printf("eval: success %.3f accuracy %.3f max_ball_speed %.2f energy %.2f (%d trials)\n",
              summary.success_rate, summary.kick_accuracy, summary.max_ball_speed,
              summary.energy_cost, summary.trials);
  std::printf("outputs: %s/grid.csv + 4 heatmaps + summary.jsonl\n", opts.out_dir.c_str());
  return kOk;
}

int cmd_ablate(const CommonOpts& opts, const std::string& ckpt_a, const std::string& ckpt_b,
               const std::string& name_a, const std::string& name_b) {
  config::Config cfg = make_config(opts);
  evalkit::EvalConfig ecfg;
  ecfg.trials = cfg.eval_trials;
  ecfg.horizon_steps = cfg.eval_horizon_steps;
  ecfg.stop_on_success = cfg.eval_stop_on_success;
  ecfg.workers = cfg.workers;

  auto run_one = [&](const std::string& path, const std::string& tag,
                     evalkit::EvalSummary* summary) {
    const net::ParamBundle<float> policy = load_policy(path);
    pipeline::EnvSettings env = cfg.env_settings(world::Stage::kKick);
    env.perception_enabled = policy.kind == net::ArchKind::kStudent;
    const evalkit::MetricsGrid grid =
        evalkit::evaluate_grid(policy, env, ecfg, opts.seed, summary);
    evalkit::emit_outputs(grid, *summary, opts.out_dir + "/" + tag);
  };
  std::filesystem::create_directories(opts.out_dir);
  evalkit::EvalSummary a, b;
  run_one(ckpt_a, name_a, &a);
  run_one(ckpt_b, name_b, &b);
  const std::string table = evalkit::ablation_table(name_a, a, name_b, b);
  std::printf("%s", table.c_str());
  svg::write_file(opts.out_dir + "/ablation.txt", table);
  return kOk;
}

int cmd_noise_check(double c_vel, double c_min, int samples, uint64_t seed) {
  perception::NoiseParams noise;
  noise.c_vel = c_vel;
  noise.c_min = c_min;
  noise.validate();
  const std::vector<double> speeds = {0.0, c_vel, 2.0 * c_vel};
  const auto rows = diagnostics::noise_check(noise, speeds, samples, seed);
  bool all_pass = true;
  std::printf("%10s %14s %14s %14s %12s %6s\n", "speed", "predicted", "measured_x", "measured_y",
              "mean_bias", "pass");
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    std::printf("%10.3f %14.6f %14.6f %14.6f %12.2e %6s\n", r.speed, r.predicted_std,
                r.measured_std_x, r.measured_std_y, r.mean_bias, r.pass ? "yes" : "NO");
  }
  return all_pass ? kOk : kCheckFailed;
}

int cmd_grad_check(int draws, int coords, double h, double tolerance, uint64_t seed) {
  const auto teacher = diagnostics::grad_check_teacher(net::TeacherDesc::make_default(), draws,
                                                       coords, h, tolerance, seed);
  std::printf("teacher: max relative error %.3e over %d coords (%s)\n", teacher.max_rel_error,
              teacher.coords_checked, teacher.pass ? "pass" : "FAIL");
  const auto student = diagnostics::grad_check_student(net::StudentDesc::make_default(), draws,
                                                       coords, h, tolerance, seed);
  std::printf("student: max relative error %.3e over %d coords (%s)\n", student.max_rel_error,
              student.coords_checked, student.pass ? "pass" : "FAIL");
  return teacher.pass && student.pass ? kOk : kCheckFailed;
}

int cmd_replay(const std::string& trajectory_path, const std::string& out_dir, int stride) {
  const evalkit::Trajectory traj = evalkit::load_trajectory(trajectory_path);
  const int frames = evalkit::render_frames(traj, out_dir, stride);
  std::printf("replay: wrote %d frames to %s\n", frames, out_dir.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar humanoid-soccer training and evaluation pipeline"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default(true);  // --help shows defaults

  CommonOpts opts;
  bool seed_set = false, out_set = false;

  // train
  auto* train = app.add_subcommand("train", "train the teacher (stage 1 chase, stage 2 kick)");
  int train_stage = 1;
  std::string in_ckpt, out_ckpt;
  train->add_option("--stage", train_stage, "1 (chasing) or 2 (directional kicking)")
      ->check(CLI::Range(1, 2));
  train->add_option("--in", in_ckpt, "input checkpoint (stage 2; default <out>/stage1.ckpt)");
  train->add_option("--out-ckpt", out_ckpt, "output checkpoint path");
  add_common(train, &opts);

  // distill
  auto* distill = app.add_subcommand("distill", "distill the teacher into the student (stage 3)");
  distill->add_option("--in", in_ckpt, "stage-2 checkpoint (default <out>/stage2.ckpt)");
  distill->add_option("--out-ckpt", out_ckpt, "output checkpoint path");
  add_common(distill, &opts);

  // adapt
  auto* adapt = app.add_subcommand("adapt", "adapt the student online (stage 4)");
  std::string algo = "np3o";
  adapt->add_option("--algo", algo, "np3o | ppo-fixed:<coef> (ablation arm)");
  adapt->add_option("--in", in_ckpt, "stage-3 checkpoint (default <out>/stage3.ckpt)");
  adapt->add_option("--out-ckpt", out_ckpt, "output checkpoint path");
  add_common(adapt, &opts);

  // eval
  auto* eval = app.add_subcommand("eval", "9x9 grid evaluation of a checkpoint");
  std::string eval_ckpt;
  int eval_trials = 0, eval_record = 0;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint to evaluate")->required();
  eval->add_option("--trials", eval_trials, "trials per cell (default from config: 50)");
  eval->add_option("--record", eval_record, "dump the first N trial trajectories");
  add_common(eval, &opts);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "paired grid evaluation of two checkpoints");
  std::string ckpt_a, ckpt_b, name_a = "a", name_b = "b";
  ablate->add_option("--checkpoint-a", ckpt_a, "first checkpoint")->required();
  ablate->add_option("--checkpoint-b", ckpt_b, "second checkpoint")->required();
  ablate->add_option("--name-a", name_a, "label for the first arm");
  ablate->add_option("--name-b", name_b, "label for the second arm");
  add_common(ablate, &opts);

  // noise-check
  auto* noise = app.add_subcommand("noise-check", "statistics of the perception noise model");
  double cvel = 2.0, cmin = 0.03;
  int noise_samples = 100000;
  noise->add_option("--cvel", cvel, "velocity scaling constant (default 2.0)");
  noise->add_option("--cmin", cmin, "noise floor (default 0.03)");
  noise->add_option("--samples", noise_samples, "draws per speed (default 100000)");
  add_common(noise, &opts);

  // grad-check
  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient suite");
  int gc_draws = 20, gc_coords = 3;
  double gc_h = 1e-5, gc_tol = 1e-4;
  grad->add_option("--draws", gc_draws, "random input draws per architecture (default 20)");
  grad->add_option("--coords", gc_coords, "parameter coordinates per draw (default 3)");
  grad->add_option("--fd-step", gc_h, "central-difference step (default 1e-5)");
  grad->add_option("--tolerance", gc_tol, "max relative error (default 1e-4)");
  add_common(grad, &opts);

  // replay
  auto* replay = app.add_subcommand("replay", "render a stored trajectory to SVG frames");
  std::string traj_path, replay_out = "frames";
  int stride = 5;
  replay->add_option("--trajectory", traj_path, "trajectory .jsonl from eval --record")
      ->required();
  replay->add_option("--frames-out", replay_out, "frame output directory");
  replay->add_option("--stride", stride, "render every k-th step (default 5)");
  add_common(replay, &opts);

  // help-config
  auto* helpcfg = app.add_subcommand("help-config", "list every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  seed_set = app.count_all() && (train->count("--seed") || distill->count("--seed") ||
                                 adapt->count("--seed") || eval->count("--seed") ||
                                 ablate->count("--seed") || noise->count("--seed") ||
                                 grad->count("--seed") || replay->count("--seed"));
  out_set = train->count("--out") || distill->count("--out") || adapt->count("--out") ||
            eval->count("--out") || ablate->count("--out") || noise->count("--out") ||
            grad->count("--out") || replay->count("--out");
  apply_env(opts, seed_set, out_set);

  try {
    if (train->parsed()) {
      return cmd_train_stage(opts, train_stage, in_ckpt, out_ckpt, {});
    }
    if (distill->parsed()) {
      return cmd_train_stage(opts, 3, in_ckpt, out_ckpt, {});
    }
    if (adapt->parsed()) {
      pipeline::AdaptAlgo arm;
      if (algo == "np3o") {
        arm.constrained = true;
      } else if (algo.rfind("ppo-fixed:", 0) == 0) {
        arm.constrained = false;
        arm.fixed_coef = std::stod(algo.substr(10));
      } else {
        std::fprintf(stderr, "error: config: unknown --algo '%s' (np3o | ppo-fixed:<coef>)\n",
                     algo.c_str());
        return kConfigError;
      }
      return cmd_train_stage(opts, 4, in_ckpt, out_ckpt, arm);
    }
    if (eval->parsed()) return cmd_eval(opts, eval_ckpt, eval_trials, eval_record);
    if (ablate->parsed()) return cmd_ablate(opts, ckpt_a, ckpt_b, name_a, name_b);
    if (noise->parsed()) return cmd_noise_check(cvel, cmin, noise_samples, opts.seed);
    if (grad->parsed()) return cmd_grad_check(gc_draws, gc_coords, gc_h, gc_tol, opts.seed);
    if (replay->parsed()) return cmd_replay(traj_path, replay_out, stride);
    if (helpcfg->parsed()) {
      std::printf("%s", config::config_doc().c_str());
      return kOk;
    }
  } catch (const config::ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return kConfigError;
  } catch (const pipeline::PrerequisiteError& e) {
    std::fprintf(stderr, "error: prerequisite: %s\n", e.what());
    return kPrerequisiteError;
  } catch (const pipeline::CheckpointError& e) {
    std::fprintf(stderr, "error: prerequisite: %s\n", e.what());
    return kPrerequisiteError;
  } catch (const pipeline::NumericalError& e) {
    std::fprintf(stderr, "error: numeric: %s\n", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return kOther;
  }
  return kOk;
}
