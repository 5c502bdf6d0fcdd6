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

#include "striker/perception.hpp"

#include <cstring>
#include <stdexcept>

namespace striker::perception {

void NoiseParams::validate() const {
  if (!(c_vel > 0.0)) throw std::invalid_argument("NoiseParams: c_vel must be > 0");
  if (!(c_min >= 0.0)) throw std::invalid_argument("NoiseParams: c_min must be >= 0");
}

Vec2 velocity_dependent_noise(const Vec2& p_true, const Vec2& v_head, const NoiseParams& noise,
                              Rng& rng) {
  const double sigma = norm(v_head) / noise.c_vel + noise.c_min;
  const Vec2 n = rng.normal2();
  return p_true + sigma * n;
}

Vec2 apparent_velocity(const world::WorldState& s, const Vec2& point_world,
                       const Vec2& point_world_velocity) {
  const Vec2 rel = point_world - s.robot.position;
  const Vec2 p_body = rotate(rel, -s.robot.heading);
  const Vec2 v_rel = rotate(point_world_velocity - world::robot_world_velocity(s),
                            -s.robot.heading);
  return v_rel - s.robot.yaw_rate * perp(p_body);
}

namespace {

// Shared proprioceptive prefix (entries 0..15).
template <typename FrameT>
void fill_proprio(FrameT& f, const world::WorldState& s, const world::Command& cmd,
                  const world::Action& prev_action) {
  f.v[Obs::kCmdVx] = static_cast<float>(cmd.vx);
  f.v[Obs::kCmdVy] = static_cast<float>(cmd.vy);
  f.v[Obs::kCmdOmega] = static_cast<float>(cmd.omega);
  f.v[Obs::kGaitSin] = static_cast<float>(std::sin(s.robot.gait_phase));
  f.v[Obs::kGaitCos] = static_cast<float>(std::cos(s.robot.gait_phase));
  f.v[Obs::kGravX] = 0.0f;
  f.v[Obs::kGravY] = 0.0f;
  f.v[Obs::kGravZ] = -1.0f;
  f.v[Obs::kYawRate] = static_cast<float>(s.robot.yaw_rate);
  f.v[Obs::kVelX] = static_cast<float>(s.robot.body_velocity.x);
  f.v[Obs::kVelY] = static_cast<float>(s.robot.body_velocity.y);
  const world::Action pa = prev_action.clamped();
  f.v[Obs::kPrevAction + 0] = static_cast<float>(pa.vx);
  f.v[Obs::kPrevAction + 1] = static_cast<float>(pa.vy);
  f.v[Obs::kPrevAction + 2] = static_cast<float>(pa.omega);
  f.v[Obs::kPrevAction + 3] = static_cast<float>(pa.kick_trigger);
  f.v[Obs::kPrevAction + 4] = static_cast<float>(pa.kick_dir);
}

Vec2 to_body(const world::WorldState& s, const Vec2& point_world) {
  return rotate(point_world - s.robot.position, -s.robot.heading);
}

}  // namespace

ObservationFrame tick_and_assemble(const world::WorldState& s, PerceptClock& clock,
                                   const NoiseParams& noise, bool fov_flag,
                                   const world::Command& cmd, const world::Action& prev_action,
                                   Rng& rng) {
  ObservationFrame f;
  fill_proprio(f, s, cmd, prev_action);

  const double t = s.sim_time;
  bool publish = false;
  if (t >= clock.next_publish_time - 1e-9) {
    publish = true;
    do {
      clock.next_publish_time += clock.ball_period;
    } while (clock.next_publish_time - 1e-9 <= t);
  }

  if (publish && fov_flag) {
    const Vec2 ball_body = to_body(s, s.ball.position);
    const Vec2 v_head = apparent_velocity(s, s.ball.position, s.ball.velocity);
    const Vec2 noisy = velocity_dependent_noise(ball_body, v_head, noise, rng);
    f.v[Obs::kBallX] = static_cast<float>(noisy.x);
    f.v[Obs::kBallY] = static_cast<float>(noisy.y);
    f.v[Obs::kBallValid] = 1.0f;
    clock.last_ball_publish = t;
  } else {
    f.v[Obs::kBallX] = 0.0f;
    f.v[Obs::kBallY] = 0.0f;
    f.v[Obs::kBallValid] = 0.0f;
  }

  // Goal estimate refreshes at the proprioceptive rate; its apparent motion is
  // purely the robot's egomotion.
  const Vec2 goal_body = to_body(s, s.goal_position);
  const Vec2 goal_head_vel = apparent_velocity(s, s.goal_position, {0.0, 0.0});
  const Vec2 noisy_goal = velocity_dependent_noise(goal_body, goal_head_vel, noise, rng);
  f.v[Obs::kGoalX] = static_cast<float>(noisy_goal.x);
  f.v[Obs::kGoalY] = static_cast<float>(noisy_goal.y);
  return f;
}

PrivilegedFrame assemble_teacher_obs(const world::WorldState& s, const world::Command& cmd,
                                     const world::Action& prev_action) {
  PrivilegedFrame f;
  fill_proprio(f, s, cmd, prev_action);
  const Vec2 ball_body = to_body(s, s.ball.position);
  const Vec2 goal_body = to_body(s, s.goal_position);
  f.v[Obs::kBallX] = static_cast<float>(ball_body.x);
  f.v[Obs::kBallY] = static_cast<float>(ball_body.y);
  f.v[Obs::kGoalX] = static_cast<float>(goal_body.x);
  f.v[Obs::kGoalY] = static_cast<float>(goal_body.y);
  f.v[Obs::kBallValid] = 1.0f;

  const Vec2 ball_vel_body = rotate(s.ball.velocity, -s.robot.heading);
  const Vec2 push_body = rotate(s.active_push, -s.robot.heading);
  const Vec2 world_vel = world::robot_world_velocity(s);
  f.v[Priv::kBallVelX] = static_cast<float>(ball_vel_body.x);
  f.v[Priv::kBallVelY] = static_cast<float>(ball_vel_body.y);
  f.v[Priv::kBallMass] = static_cast<float>(s.ball.mass);
  f.v[Priv::kBallDecel] = static_cast<float>(s.ball.rolling_decel);
  f.v[Priv::kPushX] = static_cast<float>(push_body.x);
  f.v[Priv::kPushY] = static_cast<float>(push_body.y);
  f.v[Priv::kWorldVelX] = static_cast<float>(world_vel.x);
  f.v[Priv::kWorldVelY] = static_cast<float>(world_vel.y);
  return f;
}

ObservationFrame assemble_clean_obs(const world::WorldState& s, const world::Command& cmd,
                                    const world::Action& prev_action) {
  ObservationFrame f;
  fill_proprio(f, s, cmd, prev_action);
  const Vec2 ball_body = to_body(s, s.ball.position);
  const Vec2 goal_body = to_body(s, s.goal_position);
  f.v[Obs::kBallX] = static_cast<float>(ball_body.x);
  f.v[Obs::kBallY] = static_cast<float>(ball_body.y);
  f.v[Obs::kGoalX] = static_cast<float>(goal_body.x);
  f.v[Obs::kGoalY] = static_cast<float>(goal_body.y);
  f.v[Obs::kBallValid] = 1.0f;
  return f;
}

HistoryBuffer::HistoryBuffer(int horizon) : horizon_(horizon), ring_(horizon) {
  if (horizon <= 0) throw std::invalid_argument("HistoryBuffer: horizon must be > 0");
}

void HistoryBuffer::clear() {
  for (auto& f : ring_) f = ObservationFrame{};
  head_ = 0;
}

void HistoryBuffer::push(const ObservationFrame& frame) {
  ring_[head_] = frame;
  head_ = (head_ + 1) % horizon_;
}

const ObservationFrame& HistoryBuffer::frame(int i) const {
  return ring_[(head_ + i) % horizon_];
}

void HistoryBuffer::copy_to(float* dst) const {
  for (int i = 0; i < horizon_; ++i) {
    std::memcpy(dst + static_cast<size_t>(i) * kObsDim, frame(i).v.data(),
                sizeof(float) * kObsDim);
  }
}

}  // namespace striker::perception
