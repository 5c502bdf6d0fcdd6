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

#include <utility>

#include "striker/common.hpp"
#include "striker/world.hpp"

namespace striker::rewards {

// Per-term weights. Task weights are non-negative, regularization weights are
// non-positive; the two presets differ in the tracking and ball-velocity
// entries. sigma_* are the bandwidths of the exponential tracking kernels.
struct RewardWeights {
  double survival = 1.0;
  double track_lin = 2.0;
  double track_ang = 2.0;
  double head_track = 1.0;
  double ball_velocity = 0.0;

  double action_rate = -1.0;
  double yaw_effort = -0.2;
  double accel_effort = -0.01;
  double kick_effort = -0.1;

  double sigma_lin = 0.25;
  double sigma_ang = 0.25;

  static RewardWeights chase();
  static RewardWeights kick();
  static RewardWeights for_stage(world::Stage stage);

  void validate() const;  // throws std::invalid_argument
};

// Raw per-term values plus the two aggregates. r_task sums the weighted task
// rows; c_regu is the non-negative magnitude of the weighted regularization
// rows (weights are <= 0, so c_regu = -sum(w * term) >= 0).
struct RewardBreakdown {
  double survival = 0.0;
  double track_lin = 0.0;
  double track_ang = 0.0;
  double head_track = 0.0;
  double ball_velocity = 0.0;

  double action_rate = 0.0;
  double yaw_effort = 0.0;
  double accel_effort = 0.0;
  double kick_effort = 0.0;

  double r_task = 0.0;
  double c_regu = 0.0;
};

// Unit vector from the ball to the goal. Degenerate input (ball at the goal)
// returns +x by convention.
Vec2 goal_direction(const Vec2& goal, const Vec2& ball);

// Projection of the ball velocity onto the goal direction, capped at 6.0.
double ball_velocity_reward(const Vec2& v_ball, const Vec2& goal_dir);

// Exponential tracking kernels for linear and yaw velocity. Both in (0, 1].
std::pair<double, double> tracking_rewards(const Vec2& v_target, double yaw_target,
                                           const Vec2& v_actual, double yaw_actual,
                                           double sigma_lin, double sigma_ang);

struct RegularizationTerms {
  double action_rate = 0.0;   // |a_t - a_{t-1}|^2
  double yaw_effort = 0.0;    // yaw_rate^2
  double accel_effort = 0.0;  // |dv_body / dt|^2
  double kick_effort = 0.0;   // kick speed^2 on kick steps
  double c_regu = 0.0;
};

RegularizationTerms regularization_cost(const world::Action& action,
                                        const world::Action& prev_action, const Vec2& dv_body,
                                        double dt, double yaw_rate, double kick_speed,
                                        const RewardWeights& w);

// Full per-step breakdown. `after` is the post-step state; `prev_body_velocity`
// the base body velocity before the step; `fov` the true field-of-view flag.
RewardBreakdown compose_reward(world::Stage stage, const world::WorldState& after,
                               const world::StepEvents& events, const world::Action& action,
                               const world::Action& prev_action, const Vec2& prev_body_velocity,
                               const world::Command& cmd, const RewardWeights& w, bool fov,
                               double dt);

}  // namespace striker::rewards
