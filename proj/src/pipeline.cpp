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

#include "striker/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "striker/distill.hpp"

namespace striker::pipeline {

namespace {

using nlohmann::json;

class StatsLogger {
 public:
  explicit StatsLogger(const std::string& path) {
    if (path.empty()) return;
    const auto dir = std::filesystem::path(path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    out_.open(path, std::ios::trunc);
    if (!out_) throw std::runtime_error("stats log: cannot write " + path);
  }
  void log(const json& record) {
    if (out_.is_open()) out_ << record.dump() << "\n" << std::flush;
  }

 private:
  std::ofstream out_;
};

Checkpoint load_prerequisite(const StageRunConfig& run, int expected_stage) {
  if (run.in_checkpoint.empty()) {
    throw PrerequisiteError("stage " + std::to_string(run.stage) +
                            " requires a stage-" + std::to_string(expected_stage) +
                            " checkpoint (none given)");
  }
  Checkpoint ckpt;
  try {
    ckpt = load_checkpoint(run.in_checkpoint);
  } catch (const CheckpointError& e) {
    throw PrerequisiteError("stage " + std::to_string(run.stage) +
                            " prerequisite checkpoint unreadable: " + e.what());
  }
  if (ckpt.stage != expected_stage) {
    throw PrerequisiteError("stage " + std::to_string(run.stage) + " requires a stage-" +
                            std::to_string(expected_stage) + " checkpoint, got stage " +
                            std::to_string(ckpt.stage));
  }
  return ckpt;
}

bool params_finite(const net::ParamBundle<float>& p) {
  for (const auto& t : p.tensors) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

// Shared PPO/N-P3O driver over a set of env instances.
struct RlLoopSpec {
  world::Stage stage;
  uint64_t total_steps;
  double fixed_reg_coef;  // folded into the reward stream
  const algos::ConstraintSpec* constraint = nullptr;
  int value_warmup_iters = 0;
  bool perception_enabled = false;  // student-style observations
  double lr_scale = 1.0;
  double entropy_coef = std::numeric_limits<double>::quiet_NaN();  // NaN = config value
};

void run_rl_loop(const StageRunConfig& run, const RlLoopSpec& spec, EnvSettings env_settings,
                 net::ParamBundle<float>& params, AdamState<float>& adam, StatsLogger& logger,
                 uint64_t stage_seed, uint64_t* step_counter) {
  const config::Config& cfg = run.cfg;
  env_settings.perception_enabled = spec.perception_enabled;

  std::vector<EnvInstance> envs;
  std::vector<Rng> action_rngs;
  envs.reserve(cfg.num_envs);
  for (int e = 0; e < cfg.num_envs; ++e) {
    envs.emplace_back(env_settings, derive_seed(stage_seed, 0x776f726cULL, e));
    action_rngs.emplace_back(derive_seed(stage_seed, 0x616374ULL, e));
  }

  RolloutConfig rollout;
  rollout.n_envs = cfg.num_envs;
  rollout.horizon = cfg.rollout_len;
  rollout.fixed_reg_coef = spec.fixed_reg_coef;
  rollout.stochastic = true;
  rollout.workers = cfg.workers;

  algos::PpoConfig ppo = cfg.ppo;
  ppo.workers = cfg.workers;
  ppo.lr *= spec.lr_scale;
  if (std::isfinite(spec.entropy_coef)) ppo.entropy_coef = spec.entropy_coef;

  algos::TrajectoryBatch<float> batch;
  const uint64_t steps_per_iter =
      static_cast<uint64_t>(cfg.num_envs) * static_cast<uint64_t>(cfg.rollout_len);
  const uint64_t iters = (spec.total_steps + steps_per_iter - 1) / steps_per_iter;

  for (uint64_t iter = 0; iter < iters; ++iter) {
    const RolloutInfo info = collect_rollout(envs, action_rngs, params, rollout, batch);

    algos::PpoConfig iter_cfg = ppo;
    if (static_cast<int>(iter) < spec.value_warmup_iters) iter_cfg.policy_coef = 0.0;
    // Linear learning-rate anneal over the stage.
    iter_cfg.lr = ppo.lr * (1.0 - static_cast<double>(iter) / static_cast<double>(iters));

    const uint64_t update_seed = derive_seed(stage_seed, 0x757064ULL, iter);
    algos::UpdateStats stats;
    if (spec.constraint) {
      stats = algos::np3o_update(batch, params, adam, iter_cfg, *spec.constraint, update_seed);
    } else {
      stats = algos::ppo_update(batch, params, adam, iter_cfg, update_seed);
    }
    *step_counter += steps_per_iter;

    if (!params_finite(params)) {
      throw NumericalError("stage " + std::to_string(run.stage) +
                           ": non-finite parameters at iteration " + std::to_string(iter));
    }

    json rec;
    rec["stage"] = run.stage;
    rec["iter"] = iter;
    rec["env_steps"] = *step_counter;
    rec["policy_loss"] = stats.policy_loss;
    rec["value_loss_r"] = stats.value_loss_r;
    rec["value_loss_c"] = stats.value_loss_c;
    rec["entropy"] = stats.entropy;
    rec["kl"] = stats.kl;
    rec["clip_fraction"] = stats.clip_fraction;
    rec["mean_cost"] = stats.mean_cost;
    rec["violation_fraction"] = stats.violation_fraction;
    rec["penalty"] = stats.penalty;
    rec["grad_norm"] = stats.grad_norm;
    rec["mean_reward"] = stats.mean_reward;
    rec["episode_return"] = info.mean_episode_return;
    rec["episode_cost"] = info.mean_episode_cost;
    rec["episodes"] = info.episodes_finished;
    rec["kicks"] = info.kicks;
    rec["skipped_nonfinite"] = stats.skipped_nonfinite;
    logger.log(rec);
    if (!run.quiet && iter % 10 == 0) {
      std::fprintf(stderr,
                   "[stage %d] iter %llu/%llu return %.2f cost %.3f kicks %d kl %.4f\n",
                   run.stage, static_cast<unsigned long long>(iter),
                   static_cast<unsigned long long>(iters), info.mean_episode_return,
                   stats.mean_cost, info.kicks, stats.kl);
    }
  }
}

}  // namespace

Checkpoint run_stage(const StageRunConfig& run) {
  const config::Config& cfg = run.cfg;
  StatsLogger logger(run.stats_path);
  const uint64_t stage_seed = derive_seed(run.seed, 0x73746167ULL, run.stage);

  Checkpoint out;
  out.master_seed = run.seed;

  switch (run.stage) {
    case 1: {
      net::ParamBundle<float> params = net::make_teacher<float>(net::TeacherDesc::make_default());
      Rng init_rng(derive_seed(stage_seed, 0x696e6974ULL));
      net::init_params(params, init_rng);
      AdamState<float> adam;
      adam.init(params);

      RlLoopSpec spec;
      spec.stage = world::Stage::kChase;
      spec.total_steps = cfg.stage1_steps;
      spec.fixed_reg_coef = cfg.fixed_reg_coef;
      uint64_t steps = 0;
      run_rl_loop(run, spec, cfg.env_settings(world::Stage::kChase), params, adam, logger,
                  stage_seed, &steps);

      // Reference gait cost for the stage-4 constraint.
      const double h = algos::estimate_constraint_threshold(
          params, cfg.env_settings(world::Stage::kChase), cfg.h_estimate_steps, cfg.workers,
          derive_seed(stage_seed, 0x68ULL));

      out.stage = 1;
      out.lineage = {1};
      out.cumulative_steps = steps;
      out.h_reference = h;
      out.params = std::move(params);
      out.adam = std::move(adam);
      break;
    }
    case 2: {
      Checkpoint prev = load_prerequisite(run, 1);
      if (prev.params.kind != net::ArchKind::kTeacher) {
        throw PrerequisiteError("stage 2 expects teacher parameters");
      }
      net::ParamBundle<float> params = std::move(prev.params);
      AdamState<float> adam = std::move(prev.adam);
      if (cfg.stage2_reset_value) {
        Rng vrng(derive_seed(stage_seed, 0x76616c75ULL));
        net::ParamBundle<float> fresh = net::make_teacher<float>(params.teacher);
        net::init_params(fresh, vrng);
        for (int i = net::TIx::kCW0; i <= net::TIx::kCBc; ++i) params.at(i) = fresh.at(i);
        adam.init(params);
      }

      RlLoopSpec spec;
      spec.stage = world::Stage::kKick;
      spec.total_steps = cfg.stage2_steps;
      spec.fixed_reg_coef = cfg.fixed_reg_coef;
      uint64_t steps = prev.cumulative_steps;
      run_rl_loop(run, spec, cfg.env_settings(world::Stage::kKick), params, adam, logger,
                  stage_seed, &steps);

      out.stage = 2;
      out.lineage = prev.lineage;
      out.lineage.push_back(2);
      out.cumulative_steps = steps;
      out.h_reference = prev.h_reference;
      out.params = std::move(params);
      out.adam = std::move(adam);
      break;
    }
    case 3: {
      Checkpoint prev = load_prerequisite(run, 2);
      if (prev.params.kind != net::ArchKind::kTeacher) {
        throw PrerequisiteError("stage 3 expects teacher parameters");
      }
      net::ParamBundle<float> student =
          net::make_student<float>(net::StudentDesc::make_default());
      Rng init_rng(derive_seed(stage_seed, 0x696e6974ULL));
      net::init_params(student, init_rng);
      AdamState<float> adam;
      adam.init(student);

      algos::DaggerConfig dagger = cfg.dagger;
      dagger.workers = cfg.workers;
      algos::DaggerDataset dataset(derive_seed(stage_seed, 0x64617461ULL), dagger.dataset_cap,
                                   dagger.heldout_fraction);
      EnvSettings env_settings = cfg.env_settings(world::Stage::kKick);
      env_settings.perception_enabled = true;

      uint64_t steps = prev.cumulative_steps;
      for (int round = 0; round < cfg.dagger_rounds; ++round) {
        const algos::DaggerRoundResult rr = algos::dagger_round(
            student, prev.params, env_settings, round, dataset, adam, dagger, stage_seed);
        steps += static_cast<uint64_t>(rr.states_collected);
        json rec;
        rec["stage"] = 3;
        rec["round"] = round;
        rec["heldout_mse"] = rr.heldout_mse;
        rec["train_mse"] = rr.final_train_mse;
        rec["teacher_action_fraction"] = rr.teacher_action_fraction;
        rec["states"] = rr.states_collected;
        rec["dataset_train_size"] = rr.dataset_train_size;
        logger.log(rec);
        if (!run.quiet) {
          std::fprintf(stderr, "[stage 3] round %d heldout_mse %.6f dataset %zu\n", round,
                       rr.heldout_mse, rr.dataset_train_size);
        }
        if (!params_finite(student)) {
          throw NumericalError("stage 3: non-finite parameters at round " +
                               std::to_string(round));
        }
      }

      out.stage = 3;
      out.lineage = prev.lineage;
      out.lineage.push_back(3);
      out.cumulative_steps = steps;
      out.h_reference = prev.h_reference;
      out.params = std::move(student);
      out.adam = std::move(adam);
      break;
    }
    case 4: {
      Checkpoint prev = load_prerequisite(run, 3);
      if (prev.params.kind != net::ArchKind::kStudent) {
        throw PrerequisiteError("stage 4 expects student parameters");
      }
      net::ParamBundle<float> params = std::move(prev.params);
      AdamState<float> adam;
      adam.init(params);  // new objective, fresh moments
      // Distillation never trains the exploration std; start the fine-tuning
      // stage at its own (narrow) scale.
      params.log_std().setConstant(static_cast<float>(cfg.stage4_init_log_std));

      double h = cfg.np3o_h_override;
      if (!std::isfinite(h)) h = prev.h_reference;
      if (!std::isfinite(h)) {
        throw PrerequisiteError(
            "stage 4: no constraint threshold (lineage lacks h, set np3o.h_override)");
      }
      algos::ConstraintSpec constraint;
      constraint.h = h;
      constraint.kappa = cfg.np3o_kappa;

      EnvSettings env_settings = cfg.env_settings(world::Stage::kKick);
      env_settings.sim.ball_push_speed_bound *= cfg.stage4_push_bound_factor;
      env_settings.sim.push_interval *= cfg.stage4_push_interval_factor;

      RlLoopSpec spec;
      spec.stage = world::Stage::kKick;
      spec.total_steps = cfg.stage4_steps;
      spec.perception_enabled = true;
      spec.value_warmup_iters = cfg.stage4_value_warmup_iters;
      spec.lr_scale = cfg.stage4_lr_scale;
      spec.entropy_coef = cfg.stage4_entropy_coef;
      if (run.adapt.constrained) {
        spec.fixed_reg_coef = 0.0;
        spec.constraint = &constraint;
      } else {
        spec.fixed_reg_coef = run.adapt.fixed_coef;
      }
      uint64_t steps = prev.cumulative_steps;
      run_rl_loop(run, spec, env_settings, params, adam, logger, stage_seed, &steps);

      out.stage = 4;
      out.lineage = prev.lineage;
      out.lineage.push_back(4);
      out.cumulative_steps = steps;
      out.h_reference = h;
      out.params = std::move(params);
      out.adam = std::move(adam);
      break;
    }
    default:
      throw config::ConfigError("run_stage: stage must be 1..4");
  }

  if (!run.out_checkpoint.empty()) {
    const auto dir = std::filesystem::path(run.out_checkpoint).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    save_checkpoint(run.out_checkpoint, out);
  }
  return out;
}

}  // namespace striker::pipeline
