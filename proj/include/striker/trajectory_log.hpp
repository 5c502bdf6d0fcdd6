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

#include <string>
#include <vector>

#include "striker/common.hpp"

namespace striker::evalkit {

// Per-step trial record. `ball_motion_end` is the ball position after physics
// but before any boundary teleport; crossing checks use the segment from the
// previous step's final position to this point.
struct TrajStep {
  double t = 0.0;
  Vec2 robot;
  double heading = 0.0;
  Vec2 ball;             // final position (after a possible boundary reset)
  Vec2 ball_motion_end;  // pre-reset position
  Vec2 ball_velocity;
  bool kicked = false;
  Vec2 kick_velocity;
  bool ball_reset = false;
  double c_regu = 0.0;
  double robot_ball_dist = 0.0;
};

struct Trajectory {
  double goal_x = 7.0;
  double goal_half_width = 1.3;
  double field_half_length = 7.0;
  double field_half_width = 4.5;
  double dt = 0.02;
  Vec2 ball_start;
  std::vector<TrajStep> steps;
};

// Line-delimited JSON: one header record, then one record per step.
void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path);

// Renders every `stride`-th step to <out_dir>/frame_000123.svg; returns the
// number of frames written.
int render_frames(const Trajectory& traj, const std::string& out_dir, int stride);

}  // namespace striker::evalkit
