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

#pragma once

#include <optional>
#include <vector>

#include "striker/algos.hpp"
#include "striker/net.hpp"
#include "striker/perception.hpp"
#include "striker/rewards.hpp"
#include "striker/world.hpp"

namespace striker::pipeline {

// Everything one environment instance needs to run a task stage.
struct EnvSettings {
  world::SimParams sim;
  world::Stage stage = world::Stage::kChase;
  rewards::RewardWeights weights = rewards::RewardWeights::chase();
  perception::NoiseParams noise;
  double ball_period = 0.1;
  bool perception_enabled = true;  // noise + publish gating + FOV masking
  double cmd_speed_min = 0.3;
  double cmd_speed_max = 1.0;
  double cmd_omega_min = 0.8;
  double cmd_omega_max = 2.0;

  static EnvSettings for_stage(world::Stage stage) {
    EnvSettings s;
    s.stage = stage;
    s.weights = rewards::RewardWeights::for_stage(stage);
    return s;
  }
};

// One simulated environment with its perception state and seed streams. The
// instance owns every random draw it makes, so a set of instances can be
// stepped from any number of threads with identical results.
class EnvInstance {
 public:
  EnvInstance(const EnvSettings& settings, uint64_t seed);

  void reset_episode();
  // Kick-stage reset with a pinned ball position (evaluation grids).
  void reset_episode_at(const Vec2& ball_pos);

  struct StepOutcome {
    rewards::RewardBreakdown reward;
    world::StepEvents events;
  };
  StepOutcome step(const world::Action& action);

  const world::WorldState& state() const { return state_; }
  const world::Command& command() const { return cmd_; }
  const world::Action& prev_action() const { return prev_action_; }
  const perception::ObservationFrame& student_frame() const { return obs_; }
  const perception::HistoryBuffer& history() const { return hist_; }
  perception::PrivilegedFrame teacher_frame() const;
  bool ball_in_fov() const { return world::in_fov(state_, settings_.sim); }
  const EnvSettings& settings() const { return settings_; }

  // Episode bookkeeping for logging.
  double episode_return() const { return ep_return_; }
  int episode_steps() const { return ep_steps_; }

 private:
  void assemble_obs();

  EnvSettings settings_;
  world::WorldState state_;
  world::Command cmd_;
  world::Action prev_action_;
  perception::PerceptClock clock_;
  perception::HistoryBuffer hist_;
  perception::ObservationFrame obs_;
  Rng env_rng_;
  Rng noise_rng_;
  double ep_return_ = 0.0;
  int ep_steps_ = 0;
};

struct RolloutConfig {
  int n_envs = 16;
  int horizon = 1024;
  double fixed_reg_coef = 0.0;  // reward = r_task - coef * c_regu
  bool stochastic = true;
  int workers = 0;
};

struct RolloutInfo {
  double mean_episode_return = 0.0;  // raw task-reward sum over finished episodes
  double mean_episode_cost = 0.0;
  int episodes_finished = 0;
  int kicks = 0;
  int ball_resets = 0;
};

// Collects E x L transitions under the given policy into `batch`. Environments
// auto-reset; unfinished episodes bootstrap from the current value estimate.
// Non-finite blow-ups (fall proxy) invalidate the affected episode's samples.
RolloutInfo collect_rollout(std::vector<EnvInstance>& envs, std::vector<Rng>& action_rngs,
                            const net::ParamBundle<float>& params, const RolloutConfig& cfg,
                            algos::TrajectoryBatch<float>& batch);

// Fraction of full-length chase episodes that end with the robot within
// `dist_threshold` of the ball. With `params == nullptr` the actions are
// uniform random in [-1, 1]^5 (the random-policy baseline).
double chase_near_ball_rate(const net::ParamBundle<float>* params, const EnvSettings& settings,
                            int episodes, double dist_threshold, int workers, uint64_t seed);

}  // namespace striker::pipeline

namespace striker::algos {

// Per-step cost limit from a reference gait: 1.5x the average per-step
// regularization cost of the chasing policy in steady pursuit, kicks disabled.
// Requires n_steps >= 1000 for a stable estimate.
double estimate_constraint_threshold(const net::ParamBundle<float>& walk_policy,
                                     const pipeline::EnvSettings& chase_settings, int n_steps,
                                     int workers, uint64_t seed);

}  // namespace striker::algos
