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

#include <array>
#include <vector>

#include "striker/common.hpp"
#include "striker/rng.hpp"
#include "striker/world.hpp"

namespace striker::perception {

// Velocity-dependent position noise: per-component standard deviation
// |v_head| / c_vel + c_min, where v_head is the target's apparent velocity in
// the head frame (= body frame in the reduced model).
struct NoiseParams {
  double c_vel = 2.0;  // m/s of apparent speed per 1 m of extra std
  double c_min = 0.03;  // m, noise floor

  void validate() const;
};

// Asynchronous ball publisher: proprioception refreshes every control tick,
// ball estimates land at ~10 Hz with a per-episode random phase offset.
struct PerceptClock {
  double proprio_period = 0.02;
  double ball_period = 0.1;
  double phase_offset = 0.0;
  double next_publish_time = 0.0;
  double last_ball_publish = -1.0;

  void reset(Rng& rng) {
    phase_offset = rng.uniform() * ball_period;
    next_publish_time = phase_offset;
    last_ball_publish = -1.0;
  }
};

inline constexpr int kHistory = 50;
inline constexpr int kObsDim = 21;
inline constexpr int kPrivDim = 29;
inline constexpr int kActionDim = 5;

// Student observation layout (body frame throughout).
struct Obs {
  enum : int {
    kCmdVx = 0,
    kCmdVy = 1,
    kCmdOmega = 2,
    kGaitSin = 3,
    kGaitCos = 4,
    kGravX = 5,
    kGravY = 6,
    kGravZ = 7,
    kYawRate = 8,
    kVelX = 9,
    kVelY = 10,
    kPrevAction = 11,  // 5 entries
    kBallX = 16,
    kBallY = 17,
    kGoalX = 18,
    kGoalY = 19,
    kBallValid = 20,
  };
};

// Privileged extension: true values in the ball/goal slots plus the rows only
// the simulator knows.
struct Priv {
  enum : int {
    kBallVelX = 21,
    kBallVelY = 22,
    kBallMass = 23,
    kBallDecel = 24,
    kPushX = 25,
    kPushY = 26,
    kWorldVelX = 27,
    kWorldVelY = 28,
  };
};

struct ObservationFrame {
  std::array<float, kObsDim> v{};
};

struct PrivilegedFrame {
  std::array<float, kPrivDim> v{};
};

Vec2 velocity_dependent_noise(const Vec2& p_true, const Vec2& v_head, const NoiseParams& noise,
                              Rng& rng);

// Apparent velocity of a world-frame point in the body frame, including the
// rotational flow induced by the robot's own motion.
Vec2 apparent_velocity(const world::WorldState& s, const Vec2& point_world,
                       const Vec2& point_world_velocity);

// Assembles the student frame for the current state and advances the publish
// clock. The ball slot is filled only on a publish tick with the ball in the
// field of view; otherwise it is zero-masked with ball_valid = 0 (no
// zero-order hold between publishes). The goal slot refreshes every call with
// the same noise model.
ObservationFrame tick_and_assemble(const world::WorldState& s, PerceptClock& clock,
                                   const NoiseParams& noise, bool fov_flag,
                                   const world::Command& cmd, const world::Action& prev_action,
                                   Rng& rng);

// Noise-free, mask-free frame with the privileged rows appended.
PrivilegedFrame assemble_teacher_obs(const world::WorldState& s, const world::Command& cmd,
                                     const world::Action& prev_action);

// Clean student-layout frame (true ball/goal, always valid); used when
// perception modeling is disabled.
ObservationFrame assemble_clean_obs(const world::WorldState& s, const world::Command& cmd,
                                    const world::Action& prev_action);

// Fixed-length ring of the most recent H frames, zero-initialized at episode
// start, exposed oldest-first.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(int horizon = kHistory);

  void clear();
  void push(const ObservationFrame& frame);
  int horizon() const { return horizon_; }
  // i = 0 is the oldest frame, horizon() - 1 the newest.
  const ObservationFrame& frame(int i) const;
  // Writes horizon() * kObsDim floats, oldest frame first.
  void copy_to(float* dst) const;

 private:
  int horizon_;
  int head_ = 0;  // index of the oldest frame
  std::vector<ObservationFrame> ring_;
};

}  // namespace striker::perception
