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

#include "striker/common.hpp"
#include "striker/rng.hpp"

namespace striker::world {

enum class Stage { kChase, kKick };

// Physical and task parameters of the planar simulation. Defaults correspond
// to the adult-size field with goals on the +/- x axis and a 50 Hz control
// clock. All angles are radians, lengths meters, times seconds.
struct SimParams {
  double dt = 0.02;
  double tau_base = 0.3;        // first-order lag of the base velocity command
  double max_body_speed = 1.5;  // m/s at action = 1
  double max_yaw_rate = 3.0;    // rad/s at action = 1
  double gait_frequency = 1.5;  // Hz; phase advances only while commanded to move

  double field_half_length = 7.0;
  double field_half_width = 4.5;
  double goal_x = 7.0;
  double goal_half_width = 1.3;

  double contact_radius = 0.45;
  double kick_cone_half_angle = 0.6;
  double kick_speed_max = 4.5;
  double kick_cooldown = 1.0;
  bool kick_enabled = true;

  double rolling_decel_min = 0.8;
  double rolling_decel_max = 1.5;
  double ball_mass_min = 0.3;
  double ball_mass_max = 0.7;
  double ball_stop_speed = 0.01;

  double push_interval = 4.0;
  double ball_push_speed_bound = 0.1;

  double annulus_chase_inner = 0.5;
  double annulus_chase_outer = 4.0;
  double annulus_kick_inner = 0.5;
  double annulus_kick_outer = 2.0;
  double ball_reset_annulus_inner = 0.5;
  double ball_reset_annulus_outer = 1.5;
  double ball_init_x_min = -1.5;
  double ball_init_x_max = 6.5;
  double ball_init_y_min = -4.0;
  double ball_init_y_max = 4.0;
  double boundary_margin = 0.1;

  double fov_half_angle = 1.0;
  double fov_max_range = 8.0;

  double chase_timeout = 20.0;
  double kick_timeout = 40.0;

  double timeout(Stage stage) const {
    return stage == Stage::kChase ? chase_timeout : kick_timeout;
  }

  // Throws std::invalid_argument when a structural invariant is violated.
  void validate() const;
};

struct RobotBase {
  Vec2 position;
  double heading = 0.0;  // (-pi, pi]
  Vec2 body_velocity;    // body frame
  double yaw_rate = 0.0;
  double gait_phase = 0.0;  // [0, 2pi)
};

struct BallState {
  Vec2 position;
  Vec2 velocity;
  double mass = 0.45;
  double rolling_decel = 1.0;
};

// Five bounded channels: planar velocity command, yaw-rate command, kick
// trigger and kick direction offset. Channels are clamped to [-1, 1] before
// they touch the dynamics.
struct Action {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  double kick_trigger = -1.0;
  double kick_dir = 0.0;

  Action clamped() const;
  bool finite() const;
};

// Per-episode velocity command fed to the policy and to the tracking targets.
struct Command {
  double vx = 0.0;
  double vy = 0.0;  // unused by the tasks; kept for the 3-dim command layout
  double omega = 0.0;
};

enum class Termination { kNone, kFallProxy, kTimeout };

struct WorldState {
  RobotBase robot;
  BallState ball;
  Vec2 goal_position;
  double sim_time = 0.0;
  double last_kick_time = -1e9;
  double next_push_time = 0.0;
  Vec2 active_push;  // velocity delta of the most recent ball push
  Stage stage = Stage::kChase;
};

struct StepEvents {
  bool kicked = false;
  bool ball_reset = false;
  bool push_applied = false;
  bool terminated = false;
  Termination reason = Termination::kNone;
  Vec2 kick_velocity;       // ball velocity set by the kick, valid when kicked
  Vec2 ball_exit_position;  // pre-reset ball position, valid when ball_reset
};

struct StepResult {
  WorldState state;
  StepEvents events;
};

struct VelocityTarget {
  Vec2 linear;  // world frame
  double yaw = 0.0;
};

// Episode initialization. Chase: ball at the origin, robot in the wide
// annulus. Kick: ball uniform in the init region, robot in the narrow annulus
// and inside the field. Ball mass and rolling deceleration are drawn from
// their ranges in both stages.
WorldState reset(Stage stage, const SimParams& p, Rng& rng);

// Kick-stage reset with the ball pinned to a given spot (evaluation grids).
WorldState reset_kick_at(const Vec2& ball_pos, const SimParams& p, Rng& rng);

// Pursuit targets: linear target along the robot-ball direction, yaw target
// turning toward the ball with magnitude |cmd.omega|.
VelocityTarget target_velocity(const WorldState& s, const Command& cmd);

StepResult step(const WorldState& s, const Action& action, const SimParams& p, Rng& rng);

bool in_fov(const WorldState& s, const SimParams& p);

// Signed bearing from the robot heading to the ball, in (-pi, pi].
double ball_bearing(const WorldState& s);

// World-frame base velocity.
Vec2 robot_world_velocity(const WorldState& s);

bool inside_field(const Vec2& p, const SimParams& params, double margin = 0.0);

}  // namespace striker::world
