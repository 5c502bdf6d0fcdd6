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

#include "striker/rewards.hpp"

#include <stdexcept>

namespace striker::rewards {

RewardWeights RewardWeights::chase() { return RewardWeights{}; }

RewardWeights RewardWeights::kick() {
  RewardWeights w;
  w.track_lin = 0.5;
  w.track_ang = 0.5;
  w.ball_velocity = 4.0;
  return w;
}

RewardWeights RewardWeights::for_stage(world::Stage stage) {
  return stage == world::Stage::kChase ? chase() : kick();
}

void RewardWeights::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (survival < 0.0 || track_lin < 0.0 || track_ang < 0.0 || head_track < 0.0 ||
      ball_velocity < 0.0) {
    fail("RewardWeights: task weights must be >= 0");
  }
  if (action_rate > 0.0 || yaw_effort > 0.0 || accel_effort > 0.0 || kick_effort > 0.0) {
    fail("RewardWeights: regularization weights must be <= 0");
  }
  if (!(sigma_lin > 0.0 && sigma_ang > 0.0)) fail("RewardWeights: sigma must be > 0");
}

Vec2 goal_direction(const Vec2& goal, const Vec2& ball) {
  const Vec2 d = goal - ball;
  if (norm(d) <= 1e-9) return {1.0, 0.0};
  return normalized(d);
}

double ball_velocity_reward(const Vec2& v_ball, const Vec2& goal_dir) {
  return std::min(6.0, dot(v_ball, goal_dir));
}

std::pair<double, double> tracking_rewards(const Vec2& v_target, double yaw_target,
                                           const Vec2& v_actual, double yaw_actual,
                                           double sigma_lin, double sigma_ang) {
  const double lin_err2 = norm2(v_target - v_actual);
  const double ang_err = yaw_target - yaw_actual;
  return {std::exp(-lin_err2 / sigma_lin), std::exp(-ang_err * ang_err / sigma_ang)};
}

RegularizationTerms regularization_cost(const world::Action& action,
                                        const world::Action& prev_action, const Vec2& dv_body,
                                        double dt, double yaw_rate, double kick_speed,
                                        const RewardWeights& w) {
  RegularizationTerms t;
  const world::Action a = action.clamped();
  const world::Action pa = prev_action.clamped();
  const double d0 = a.vx - pa.vx;
  const double d1 = a.vy - pa.vy;
  const double d2 = a.omega - pa.omega;
  const double d3 = a.kick_trigger - pa.kick_trigger;
  const double d4 = a.kick_dir - pa.kick_dir;
  t.action_rate = d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4;
  t.yaw_effort = yaw_rate * yaw_rate;
  t.accel_effort = norm2(dv_body * (1.0 / dt));
  t.kick_effort = kick_speed * kick_speed;
  t.c_regu = -(w.action_rate * t.action_rate + w.yaw_effort * t.yaw_effort +
               w.accel_effort * t.accel_effort + w.kick_effort * t.kick_effort);
  return t;
}

RewardBreakdown compose_reward(world::Stage stage, const world::WorldState& after,
                               const world::StepEvents& events, const world::Action& action,
                               const world::Action& prev_action, const Vec2& prev_body_velocity,
                               const world::Command& cmd, const RewardWeights& w, bool fov,
                               double dt) {
  RewardBreakdown b;

  // Task terms.
  b.survival = events.terminated ? 0.0 : 1.0;
  const world::VelocityTarget target = world::target_velocity(after, cmd);
  const auto [lin, ang] =
      tracking_rewards(target.linear, target.yaw, world::robot_world_velocity(after),
                       after.robot.yaw_rate, w.sigma_lin, w.sigma_ang);
  b.track_lin = lin;
  b.track_ang = ang;
  b.head_track = fov ? 1.0 : 0.0;
  b.ball_velocity = ball_velocity_reward(
      after.ball.velocity, goal_direction(after.goal_position, after.ball.position));

  // The ball-velocity term is computed every step in both stages; the chase
  // preset carries it at zero weight so logs stay comparable across stages.
  const double w_ball_vel = stage == world::Stage::kChase ? 0.0 : w.ball_velocity;
  b.r_task = w.survival * b.survival + w.track_lin * b.track_lin + w.track_ang * b.track_ang +
             w.head_track * b.head_track + w_ball_vel * b.ball_velocity;

  // Regularization terms.
  const double kick_speed = events.kicked ? norm(events.kick_velocity) : 0.0;
  const Vec2 dv = after.robot.body_velocity - prev_body_velocity;
  const RegularizationTerms reg =
      regularization_cost(action, prev_action, dv, dt, after.robot.yaw_rate, kick_speed, w);
  b.action_rate = reg.action_rate;
  b.yaw_effort = reg.yaw_effort;
  b.accel_effort = reg.accel_effort;
  b.kick_effort = reg.kick_effort;
  b.c_regu = reg.c_regu;
  return b;
}

}  // namespace striker::rewards
