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

#include <cstring>

#include "striker/world.hpp"

using namespace striker;
using namespace striker::world;

namespace {

bool states_equal(const WorldState& a, const WorldState& b) {
  return a.robot.position.x == b.robot.position.x && a.robot.position.y == b.robot.position.y &&
         a.robot.heading == b.robot.heading &&
         a.robot.body_velocity.x == b.robot.body_velocity.x &&
         a.robot.body_velocity.y == b.robot.body_velocity.y &&
         a.robot.yaw_rate == b.robot.yaw_rate && a.robot.gait_phase == b.robot.gait_phase &&
         a.ball.position.x == b.ball.position.x && a.ball.position.y == b.ball.position.y &&
         a.ball.velocity.x == b.ball.velocity.x && a.ball.velocity.y == b.ball.velocity.y &&
         a.ball.mass == b.ball.mass && a.ball.rolling_decel == b.ball.rolling_decel &&
         a.sim_time == b.sim_time && a.last_kick_time == b.last_kick_time &&
         a.next_push_time == b.next_push_time;
}

WorldState mirror_state(const WorldState& s) {
  WorldState m = s;
  m.robot.position.y = -s.robot.position.y;
  m.robot.heading = s.robot.heading == kPi ? kPi : -s.robot.heading;
  m.robot.body_velocity.y = -s.robot.body_velocity.y;
  m.robot.yaw_rate = -s.robot.yaw_rate;
  m.ball.position.y = -s.ball.position.y;
  m.ball.velocity.y = -s.ball.velocity.y;
  m.goal_position.y = -s.goal_position.y;
  m.active_push.y = -s.active_push.y;
  return m;
}

Action mirror_action(const Action& a) {
  Action m = a;
  m.vy = -a.vy;
  m.omega = -a.omega;
  m.kick_dir = -a.kick_dir;
  return m;
}

}  // namespace

TEST_CASE("reset: chase annulus distance bounds") {
  SimParams p;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const WorldState s = reset(Stage::kChase, p, rng);
    const double d = norm(s.robot.position - s.ball.position);
    CHECK(d >= p.annulus_chase_inner - 1e-12);
    CHECK(d <= p.annulus_chase_outer + 1e-12);
    CHECK(s.ball.position.x == 0.0);
    CHECK(s.ball.position.y == 0.0);
    CHECK(s.robot.heading > -kPi);
    CHECK(s.robot.heading <= kPi);
  }
}

TEST_CASE("reset: kick ball region, robot annulus, containment") {
  SimParams p;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed(7, seed));
    const WorldState s = reset(Stage::kKick, p, rng);
    CHECK(s.ball.position.x >= p.ball_init_x_min);
    CHECK(s.ball.position.x <= p.ball_init_x_max);
    CHECK(s.ball.position.y >= p.ball_init_y_min);
    CHECK(s.ball.position.y <= p.ball_init_y_max);
    const double d = norm(s.robot.position - s.ball.position);
    CHECK(d >= p.annulus_kick_inner - 1e-12);
    CHECK(d <= p.annulus_kick_outer + 1e-12);
    CHECK(inside_field(s.robot.position, p));
    CHECK(inside_field(s.ball.position, p));
    CHECK(s.goal_position.x == p.goal_x);
    CHECK(s.ball.mass >= p.ball_mass_min);
    CHECK(s.ball.mass <= p.ball_mass_max);
    CHECK(s.ball.rolling_decel >= p.rolling_decel_min);
    CHECK(s.ball.rolling_decel <= p.rolling_decel_max);
  }
}

TEST_CASE("reset: deterministic under fixed seed") {
  SimParams p;
  Rng a(42), b(42);
  const WorldState s1 = reset(Stage::kKick, p, a);
  const WorldState s2 = reset(Stage::kKick, p, b);
  CHECK(states_equal(s1, s2));
}

TEST_CASE("target_velocity: aligned, left, right") {
  SimParams p;
  WorldState s;
  s.robot.position = {0, 0};
  s.robot.heading = 0.0;

  s.ball.position = {2, 0};
  auto t = target_velocity(s, {1.0, 0.0, 0.0});
  CHECK(t.linear.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.linear.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.yaw == 0.0);  // sign(0) = +1, but omega command is 0

  s.ball.position = {0, 3};
  t = target_velocity(s, {1.0, 0.0, 1.0});
  CHECK(t.linear.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.linear.y == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.yaw == doctest::Approx(1.0));

  s.ball.position = {0, -3};
  t = target_velocity(s, {1.0, 0.0, 0.5});
  CHECK(t.yaw == doctest::Approx(-0.5));
}

TEST_CASE("target_velocity: coincident robot and ball uses heading") {
  WorldState s;
  s.robot.position = {1, 1};
  s.robot.heading = kPi / 2;
  s.ball.position = {1, 1};
  const auto t = target_velocity(s, {2.0, 0.0, 1.0});
  CHECK(t.linear.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.linear.y == doctest::Approx(2.0));
  CHECK(t.yaw == doctest::Approx(1.0));  // theta = 0 -> sign +1
}

TEST_CASE("target_velocity: negative omega command clamps to zero magnitude") {
  WorldState s;
  s.robot.position = {0, 0};
  s.ball.position = {0, 2};
  const auto t = target_velocity(s, {1.0, 0.0, -2.0});
  CHECK(t.yaw == 0.0);
}

TEST_CASE("step: constant-deceleration ball kinematics are exact") {
  SimParams p;
  p.push_interval = 1e9;  // no pushes
  WorldState s;
  s.stage = Stage::kKick;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {-3, 0};  // far away, no contact
  s.ball.position = {0, 0};
  s.ball.velocity = {2.0, 0.0};
  s.ball.rolling_decel = 1.0;
  s.next_push_time = 1e9;
  Rng rng(0);
  Action idle;
  for (int i = 0; i < 100; ++i) {
    auto r = step(s, idle, p, rng);
    s = r.state;
  }
  CHECK(norm(s.ball.velocity) == 0.0);
  CHECK(s.ball.position.x == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.ball.position.y == 0.0);
}

TEST_CASE("step: kick rule sets full-speed ball velocity") {
  SimParams p;
  WorldState s;
  s.stage = Stage::kKick;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {0, 0};
  s.robot.heading = 0.0;
  s.ball.position = {0.2, 0};
  s.next_push_time = 1e9;
  Rng rng(0);
  Action a;
  a.kick_trigger = 1.0;
  a.kick_dir = 0.0;
  const auto r = step(s, a, p, rng);
  CHECK(r.events.kicked);
  CHECK(norm(r.state.ball.velocity) == doctest::Approx(p.kick_speed_max).epsilon(1e-12));
  CHECK(r.state.ball.velocity.x == doctest::Approx(p.kick_speed_max).epsilon(1e-12));

  // Cooldown blocks an immediate second kick.
  auto r2 = step(r.state, a, p, rng);
  CHECK_FALSE(r2.events.kicked);
}

TEST_CASE("step: kick requires the contact cone") {
  SimParams p;
  WorldState s;
  s.stage = Stage::kKick;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {0, 0};
  s.robot.heading = 0.0;
  s.ball.position = {-0.2, 0};  // behind the robot
  s.next_push_time = 1e9;
  Rng rng(0);
  Action a;
  a.kick_trigger = 1.0;
  const auto r = step(s, a, p, rng);
  CHECK_FALSE(r.events.kicked);
}

TEST_CASE("step: kick cone property over random states") {
  SimParams p;
  Rng rng(123);
  int kicks = 0;
  for (int i = 0; i < 2000; ++i) {
    WorldState s;
    s.stage = Stage::kKick;
    s.goal_position = {p.goal_x, 0.0};
    s.robot.position = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    s.robot.heading = rng.uniform(-kPi, kPi);
    s.ball.position = s.robot.position + Vec2{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    s.next_push_time = 1e9;
    const double bearing = ball_bearing(s);
    Action a;
    a.kick_trigger = 1.0;
    a.kick_dir = rng.uniform(-1, 1);
    Rng step_rng(i);
    const auto r = step(s, a, p, step_rng);
    if (r.events.kicked) {
      ++kicks;
      CHECK(std::abs(bearing) <= p.kick_cone_half_angle + 1e-9);
      CHECK(norm(s.ball.position - s.robot.position) <= p.contact_radius + 1e-9);
    }
  }
  CHECK(kicks > 50);  // the property test must actually exercise kicks
}

TEST_CASE("step: ball leaving the field resets inside") {
  SimParams p;
  WorldState s;
  s.stage = Stage::kKick;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {0, 0};
  s.ball.position = {6.99, 3.0};  // outside the goal mouth
  s.ball.velocity = {3.0, 0.0};
  s.next_push_time = 1e9;
  Rng rng(5);
  Action idle;
  bool reset_seen = false;
  for (int i = 0; i < 10 && !reset_seen; ++i) {
    const auto r = step(s, idle, p, rng);
    s = r.state;
    if (r.events.ball_reset) {
      reset_seen = true;
      CHECK(r.events.ball_exit_position.x > p.field_half_length);
      CHECK(inside_field(s.ball.position, p));
      CHECK(norm(s.ball.velocity) == 0.0);
    }
  }
  CHECK(reset_seen);
}

TEST_CASE("step: push cadence follows the interval") {
  SimParams p;
  WorldState s;
  s.stage = Stage::kKick;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {-3, -3};
  s.ball.position = {3, 3};
  s.next_push_time = p.push_interval;
  Rng rng(9);
  Action idle;
  int pushes = 0;
  const int steps = static_cast<int>(12.0 / p.dt);  // 12 s -> 3 pushes at 4 s cadence
  for (int i = 0; i < steps; ++i) {
    const auto r = step(s, idle, p, rng);
    s = r.state;
    if (r.events.push_applied) {
      ++pushes;
      CHECK(std::abs(s.active_push.x) <= p.ball_push_speed_bound);
      CHECK(std::abs(s.active_push.y) <= p.ball_push_speed_bound);
    }
  }
  CHECK(pushes == 3);
}

TEST_CASE("step: ball speed non-increasing without kick/push/reset") {
  SimParams p;
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    Rng reset_rng(trial);
    WorldState s = reset(Stage::kKick, p, reset_rng);
    s.ball.velocity = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    s.next_push_time = 1e9;
    s.robot.position = {-6.5, -4.0};  // out of contact range
    double prev_speed = norm(s.ball.velocity);
    Action idle;
    for (int i = 0; i < 100; ++i) {
      const auto r = step(s, idle, p, rng);
      s = r.state;
      if (r.events.ball_reset || r.events.kicked || r.events.push_applied) break;
      const double speed = norm(s.ball.velocity);
      CHECK(speed <= prev_speed + 1e-12);
      prev_speed = speed;
    }
  }
}

TEST_CASE("step: deterministic under identical state and stream") {
  SimParams p;
  Rng reset_rng(3);
  const WorldState s = reset(Stage::kKick, p, reset_rng);
  Action a;
  a.vx = 0.7;
  a.omega = -0.3;
  Rng r1(555), r2(555);
  const auto out1 = step(s, a, p, r1);
  const auto out2 = step(s, a, p, r2);
  CHECK(states_equal(out1.state, out2.state));
}

TEST_CASE("step: mirror symmetry across the x axis") {
  SimParams p;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    WorldState s;
    s.stage = Stage::kKick;
    s.goal_position = {p.goal_x, 0.0};
    s.robot.position = {rng.uniform(-5, 5), rng.uniform(-3, 3)};
    s.robot.heading = rng.uniform(-3.0, 3.0);  // avoid the pi edge
    s.robot.body_velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    s.robot.yaw_rate = rng.uniform(-2, 2);
    s.ball.position = s.robot.position + Vec2{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if (!inside_field(s.ball.position, p, 0.5)) continue;  // keep reset events out
    s.ball.velocity = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    s.next_push_time = 1e9;  // no random events; step is then deterministic
    Action a;
    a.vx = rng.uniform(-1, 1);
    a.vy = rng.uniform(-1, 1);
    a.omega = rng.uniform(-1, 1);
    a.kick_trigger = rng.uniform(-1, 1);
    a.kick_dir = rng.uniform(-1, 1);

    Rng r1(0), r2(0);
    const auto direct = step(mirror_state(s), mirror_action(a), p, r1);
    const auto mirrored = mirror_state(step(s, a, p, r2).state);
    CHECK(direct.state.robot.position.x ==
          doctest::Approx(mirrored.robot.position.x).epsilon(1e-12));
    CHECK(direct.state.robot.position.y ==
          doctest::Approx(mirrored.robot.position.y).epsilon(1e-12));
    CHECK(direct.state.robot.heading == doctest::Approx(mirrored.robot.heading).epsilon(1e-12));
    CHECK(direct.state.ball.position.x ==
          doctest::Approx(mirrored.ball.position.x).epsilon(1e-12));
    CHECK(direct.state.ball.position.y ==
          doctest::Approx(mirrored.ball.position.y).epsilon(1e-12));
    CHECK(direct.state.ball.velocity.x ==
          doctest::Approx(mirrored.ball.velocity.x).epsilon(1e-12));
    CHECK(direct.state.ball.velocity.y ==
          doctest::Approx(mirrored.ball.velocity.y).epsilon(1e-12));
  }
}

TEST_CASE("in_fov: bearing and range bounds") {
  SimParams p;
  p.fov_half_angle = kPi / 4;
  WorldState s;
  s.robot.position = {0, 0};
  s.robot.heading = 0.0;

  s.ball.position = {1, 0};
  CHECK(in_fov(s, p));
  s.ball.position = {-1, 0};
  CHECK_FALSE(in_fov(s, p));
  s.ball.position = {p.fov_max_range + 0.1, 0};
  CHECK_FALSE(in_fov(s, p));
  s.ball.position = {1, 0.999};  // just inside 45 degrees
  CHECK(in_fov(s, p));
  s.ball.position = {1, 1.001};
  CHECK_FALSE(in_fov(s, p));
}

TEST_CASE("step: timeout terminates the episode") {
  SimParams p;
  p.chase_timeout = 0.1;
  WorldState s;
  s.stage = Stage::kChase;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {0, 0};
  s.ball.position = {2, 0};
  s.next_push_time = 1e9;
  Rng rng(0);
  Action idle;
  StepEvents last;
  for (int i = 0; i < 5; ++i) {
    const auto r = step(s, idle, p, rng);
    s = r.state;
    last = r.events;
  }
  CHECK(last.terminated);
  CHECK(last.reason == Termination::kTimeout);
}

TEST_CASE("SimParams::validate rejects bad values") {
  SimParams p;
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SimParams{};
  p.goal_half_width = 5.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SimParams{};
  p.annulus_chase_inner = 5.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SimParams{};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("action clamping applies before dynamics") {
  SimParams p;
  WorldState s;
  s.stage = Stage::kChase;
  s.goal_position = {p.goal_x, 0.0};
  s.robot.position = {0, 0};
  s.ball.position = {3, 0};
  s.next_push_time = 1e9;
  Rng r1(0), r2(0);
  Action big;
  big.vx = 100.0;
  Action one;
  one.vx = 1.0;
  const auto rb = step(s, big, p, r1);
  const auto ro = step(s, one, p, r2);
  CHECK(rb.state.robot.body_velocity.x == ro.state.robot.body_velocity.x);
}
