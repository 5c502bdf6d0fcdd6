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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "striker/rewards.hpp"

using namespace striker;
using namespace striker::rewards;

TEST_CASE("goal_direction examples and degenerate input") {
  auto d = goal_direction({7, 0}, {3, 0});
  CHECK(d.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.y == 0.0);
  d = goal_direction({7, 3}, {7, 0});
  CHECK(d.x == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.y == doctest::Approx(1.0).epsilon(1e-14));
  d = goal_direction({1, 1}, {0, 0});
  CHECK(d.x == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(d.y == doctest::Approx(0.70710678).epsilon(1e-8));
  // Ball exactly at the goal: +x convention.
  d = goal_direction({7, 0}, {7, 0});
  CHECK(d.x == 1.0);
  CHECK(d.y == 0.0);
}

TEST_CASE("ball_velocity_reward cap and negative branch") {
  CHECK(ball_velocity_reward({10, 0}, {1, 0}) == 6.0);
  CHECK(ball_velocity_reward({3, 4}, {0.6, 0.8}) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(ball_velocity_reward({-1, 0}, {1, 0}) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("tracking_rewards kernel values") {
  auto [lin, ang] = tracking_rewards({1, 0}, 0.5, {1, 0}, 0.5, 0.25, 0.25);
  CHECK(lin == 1.0);
  CHECK(ang == 1.0);
  // |v_err|^2 = sigma -> e^-1
  std::tie(lin, ang) = tracking_rewards({0.5, 0}, 1.0, {0, 0}, 1.0, 0.25, 0.25);
  CHECK(lin == doctest::Approx(0.3678794).epsilon(1e-7));
  CHECK(ang == 1.0);
  // (w_err)^2 = 2 sigma -> e^-2
  const double werr = std::sqrt(2.0 * 0.25);
  std::tie(lin, ang) = tracking_rewards({1, 0}, 0.5, {1, 0}, 0.5 + werr, 0.25, 0.25);
  CHECK(lin == 1.0);
  CHECK(ang == doctest::Approx(0.1353353).epsilon(1e-7));
}

TEST_CASE("tracking kernels bounded in (0, 1], equal 1 iff zero error") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const Vec2 vt{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Vec2 va{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double wt = rng.uniform(-3, 3), wa = rng.uniform(-3, 3);
    const auto [lin, ang] = tracking_rewards(vt, wt, va, wa, 0.25, 0.25);
    CHECK(lin > 0.0);
    CHECK(lin <= 1.0);
    CHECK(ang > 0.0);
    CHECK(ang <= 1.0);
    if (lin == 1.0) CHECK(norm2(vt - va) == 0.0);
    if (ang == 1.0) CHECK(wt == wa);
  }
}

TEST_CASE("ball_velocity_reward never exceeds the cap, cap reachable") {
  Rng rng(5);
  bool cap_hit = false;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 v{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const Vec2 d = normalized({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double r = ball_velocity_reward(v, d);
    CHECK(r <= 6.0);
    if (r == 6.0) cap_hit = true;
  }
  CHECK(ball_velocity_reward({12, 0}, {1, 0}) == 6.0);
  (void)cap_hit;
}

TEST_CASE("regularization_cost: zero at rest, single active term") {
  const RewardWeights w = RewardWeights::chase();
  world::Action a;  // defaults
  const auto zero = regularization_cost(a, a, {0, 0}, 0.02, 0.0, 0.0, w);
  CHECK(zero.c_regu == 0.0);
  CHECK(zero.action_rate == 0.0);
  CHECK(zero.yaw_effort == 0.0);
  CHECK(zero.accel_effort == 0.0);
  CHECK(zero.kick_effort == 0.0);

  RewardWeights only_rate = w;
  only_rate.action_rate = -1.0;
  only_rate.yaw_effort = 0.0;
  only_rate.accel_effort = 0.0;
  only_rate.kick_effort = 0.0;
  world::Action b = a;
  b.vx = a.vx + 1.0;
  const auto one = regularization_cost(b, a, {0, 0}, 0.02, 0.0, 0.0, only_rate);
  CHECK(one.c_regu == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("regularization_cost matches an independent per-term recomputation") {
  Rng rng(6);
  const RewardWeights w = RewardWeights::kick();
  for (int i = 0; i < 200; ++i) {
    world::Action a, pa;
    a.vx = rng.uniform(-1, 1);
    a.vy = rng.uniform(-1, 1);
    a.omega = rng.uniform(-1, 1);
    a.kick_trigger = rng.uniform(-1, 1);
    a.kick_dir = rng.uniform(-1, 1);
    pa.vx = rng.uniform(-1, 1);
    pa.vy = rng.uniform(-1, 1);
    pa.omega = rng.uniform(-1, 1);
    pa.kick_trigger = rng.uniform(-1, 1);
    pa.kick_dir = rng.uniform(-1, 1);
    const Vec2 dv{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const double dt = 0.02;
    const double yaw = rng.uniform(-3, 3);
    const double kick_speed = rng.uniform(0, 5);

    const auto got = regularization_cost(a, pa, dv, dt, yaw, kick_speed, w);

    // Oracle: evaluate each term directly from its formula.
    const double action_rate = (a.vx - pa.vx) * (a.vx - pa.vx) + (a.vy - pa.vy) * (a.vy - pa.vy) +
                               (a.omega - pa.omega) * (a.omega - pa.omega) +
                               (a.kick_trigger - pa.kick_trigger) * (a.kick_trigger - pa.kick_trigger) +
                               (a.kick_dir - pa.kick_dir) * (a.kick_dir - pa.kick_dir);
    const double yaw_effort = yaw * yaw;
    const double accel = (dv.x / dt) * (dv.x / dt) + (dv.y / dt) * (dv.y / dt);
    const double kick_effort = kick_speed * kick_speed;
    const double expected = -(w.action_rate * action_rate + w.yaw_effort * yaw_effort +
                              w.accel_effort * accel + w.kick_effort * kick_effort);

    CHECK(got.c_regu == doctest::Approx(expected).epsilon(1e-12));
    CHECK(got.c_regu >= 0.0);
  }
}

namespace {

// Perfect-tracking scenario shared by the compose tests.
struct ComposeSetup {
  world::WorldState state;
  world::StepEvents events;
  world::Action action;
  world::Command cmd;
  Vec2 prev_body_vel;
};

ComposeSetup perfect_tracking(world::Stage stage) {
  ComposeSetup s;
  s.state.stage = stage;
  s.state.goal_position = {7, 0};
  s.state.robot.position = {0, 0};
  s.state.robot.heading = 0.0;
  s.state.ball.position = {2, 0};  // dead ahead: theta = 0
  s.cmd.vx = 1.0;
  s.cmd.omega = 0.0;  // target yaw = 0
  s.state.robot.body_velocity = {1.0, 0.0};
  s.state.robot.yaw_rate = 0.0;
  s.prev_body_vel = s.state.robot.body_velocity;  // no accel
  return s;
}

}  // namespace

TEST_CASE("compose_reward: chase-column weights sum to 6.0 at perfect tracking") {
  const ComposeSetup s = perfect_tracking(world::Stage::kChase);
  const auto b = compose_reward(world::Stage::kChase, s.state, s.events, s.action, s.action,
                                s.prev_body_vel, s.cmd, RewardWeights::chase(), true, 0.02);
  CHECK(b.r_task == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(b.c_regu == 0.0);
}

TEST_CASE("compose_reward: kick-column weights with capped ball velocity sum to 27.0") {
  ComposeSetup s = perfect_tracking(world::Stage::kKick);
  s.state.ball.velocity = {10.0, 0.0};  // toward the goal, cap engaged
  // Ball motion changes nothing else in this synthetic state.
  const auto b = compose_reward(world::Stage::kKick, s.state, s.events, s.action, s.action,
                                s.prev_body_vel, s.cmd, RewardWeights::kick(), true, 0.02);
  CHECK(b.ball_velocity == 6.0);
  CHECK(b.r_task == doctest::Approx(27.0).epsilon(1e-12));
}

TEST_CASE("compose_reward: head-tracking term drops when the ball is out of view") {
  const ComposeSetup s = perfect_tracking(world::Stage::kChase);
  const auto in = compose_reward(world::Stage::kChase, s.state, s.events, s.action, s.action,
                                 s.prev_body_vel, s.cmd, RewardWeights::chase(), true, 0.02);
  const auto out = compose_reward(world::Stage::kChase, s.state, s.events, s.action, s.action,
                                  s.prev_body_vel, s.cmd, RewardWeights::chase(), false, 0.02);
  CHECK(in.r_task - out.r_task == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.head_track == 0.0);
}

TEST_CASE("compose_reward: survival emitted only on non-terminated steps") {
  ComposeSetup s = perfect_tracking(world::Stage::kChase);
  s.events.terminated = true;
  s.events.reason = world::Termination::kTimeout;
  const auto b = compose_reward(world::Stage::kChase, s.state, s.events, s.action, s.action,
                                s.prev_body_vel, s.cmd, RewardWeights::chase(), true, 0.02);
  CHECK(b.survival == 0.0);
}

TEST_CASE("compose_reward: ball-velocity term carried at zero weight in chase") {
  ComposeSetup s = perfect_tracking(world::Stage::kChase);
  s.state.ball.velocity = {10.0, 0.0};
  const auto b = compose_reward(world::Stage::kChase, s.state, s.events, s.action, s.action,
                                s.prev_body_vel, s.cmd, RewardWeights::chase(), true, 0.02);
  CHECK(b.ball_velocity == 6.0);  // computed for logging
  CHECK(b.r_task == doctest::Approx(6.0).epsilon(1e-12));  // but not paid
}

TEST_CASE("compose_reward is a pure function") {
  const ComposeSetup s = perfect_tracking(world::Stage::kKick);
  const auto a = compose_reward(world::Stage::kKick, s.state, s.events, s.action, s.action,
                                s.prev_body_vel, s.cmd, RewardWeights::kick(), true, 0.02);
  const auto b = compose_reward(world::Stage::kKick, s.state, s.events, s.action, s.action,
                                s.prev_body_vel, s.cmd, RewardWeights::kick(), true, 0.02);
  CHECK(a.r_task == b.r_task);
  CHECK(a.c_regu == b.c_regu);
}

TEST_CASE("stage presets carry the right weight columns") {
  const RewardWeights chase = RewardWeights::for_stage(world::Stage::kChase);
  const RewardWeights kick = RewardWeights::for_stage(world::Stage::kKick);
  CHECK(chase.track_lin == 2.0);
  CHECK(chase.track_ang == 2.0);
  CHECK(chase.ball_velocity == 0.0);
  CHECK(kick.track_lin == 0.5);
  CHECK(kick.track_ang == 0.5);
  CHECK(kick.ball_velocity == 4.0);
  CHECK(chase.survival == 1.0);
  CHECK(kick.survival == 1.0);
  CHECK(chase.head_track == 1.0);
  CHECK(kick.head_track == 1.0);
}

TEST_CASE("RewardWeights::validate enforces sign structure") {
  RewardWeights w = RewardWeights::chase();
  CHECK_NOTHROW(w.validate());
  w.action_rate = 0.5;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w = RewardWeights::chase();
  w.track_lin = -1.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w = RewardWeights::chase();
  w.sigma_lin = 0.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}
