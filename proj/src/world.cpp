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

#include "striker/world.hpp"

#include <stdexcept>

namespace striker::world {

namespace {

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

Vec2 clamp_to_field(const Vec2& p, const SimParams& params, double margin) {
  return {std::clamp(p.x, -params.field_half_length + margin, params.field_half_length - margin),
          std::clamp(p.y, -params.field_half_width + margin, params.field_half_width - margin)};
}

// Samples a point at distance [inner, outer] around a center. When
// `keep_in_field` is set, rejects points outside the field (bounded retries,
// then falls back to the inner radius toward the field center).
Vec2 sample_annulus(const Vec2& center, double inner, double outer, const SimParams& params,
                    bool keep_in_field, Rng& rng) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    const double r = rng.uniform(inner, outer);
    const double phi = rng.uniform(0.0, kTwoPi);
    const Vec2 p = center + r * unit_from_angle(phi);
    if (!keep_in_field || inside_field(p, params, params.boundary_margin)) return p;
  }
  const Vec2 toward_center = normalized(Vec2{0.0, 0.0} - center);
  return center + inner * toward_center;
}

bool state_finite(const WorldState& s) {
  return is_finite(s.robot.position) && is_finite(s.robot.body_velocity) &&
         is_finite(s.robot.heading) && is_finite(s.robot.yaw_rate) &&
         is_finite(s.robot.gait_phase) && is_finite(s.ball.position) &&
         is_finite(s.ball.velocity);
}

}  // namespace

void SimParams::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(dt > 0.0)) fail("SimParams: dt must be > 0");
  if (!(tau_base > 0.0)) fail("SimParams: tau_base must be > 0");
  if (!(kick_speed_max > 0.0)) fail("SimParams: kick_speed_max must be > 0");
  if (!(goal_half_width < field_half_width)) {
    fail("SimParams: goal_half_width must be < field_half_width");
  }
  if (!(annulus_chase_inner < annulus_chase_outer)) {
    fail("SimParams: chase annulus inner radius must be < outer");
  }
  if (!(annulus_kick_inner < annulus_kick_outer)) {
    fail("SimParams: kick annulus inner radius must be < outer");
  }
  if (!(ball_reset_annulus_inner < ball_reset_annulus_outer)) {
    fail("SimParams: ball reset annulus inner radius must be < outer");
  }
  if (!(rolling_decel_min >= 0.0 && rolling_decel_min <= rolling_decel_max)) {
    fail("SimParams: rolling decel range invalid");
  }
  if (!(ball_mass_min > 0.0 && ball_mass_min <= ball_mass_max)) {
    fail("SimParams: ball mass range invalid");
  }
  if (!(ball_init_x_min < ball_init_x_max && ball_init_y_min < ball_init_y_max)) {
    fail("SimParams: ball init region invalid");
  }
  if (!(fov_half_angle > 0.0 && fov_max_range > 0.0)) fail("SimParams: fov invalid");
  if (!(chase_timeout > 0.0 && kick_timeout > 0.0)) fail("SimParams: timeouts must be > 0");
}

Action Action::clamped() const {
  return {clamp1(vx), clamp1(vy), clamp1(omega), clamp1(kick_trigger), clamp1(kick_dir)};
}

bool Action::finite() const {
  return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(omega) &&
         std::isfinite(kick_trigger) && std::isfinite(kick_dir);
}

bool inside_field(const Vec2& p, const SimParams& params, double margin) {
  return std::abs(p.x) <= params.field_half_length - margin &&
         std::abs(p.y) <= params.field_half_width - margin;
}

Vec2 robot_world_velocity(const WorldState& s) {
  return rotate(s.robot.body_velocity, s.robot.heading);
}

double ball_bearing(const WorldState& s) {
  const Vec2 r = s.ball.position - s.robot.position;
  if (norm(r) < 1e-12) return 0.0;
  return wrap_angle(std::atan2(r.y, r.x) - s.robot.heading);
}

bool in_fov(const WorldState& s, const SimParams& p) {
  const double dist = norm(s.ball.position - s.robot.position);
  if (dist > p.fov_max_range) return false;
  const double bearing = ball_bearing(s);
  return bearing >= -p.fov_half_angle && bearing <= p.fov_half_angle;
}

namespace {

WorldState reset_common(Stage stage, const Vec2& ball_pos, double annulus_inner,
                        double annulus_outer, bool robot_in_field, const SimParams& p, Rng& rng) {
  WorldState s;
  s.stage = stage;
  s.goal_position = {p.goal_x, 0.0};
  s.ball.position = ball_pos;
  s.ball.velocity = {0.0, 0.0};
  // Draw order: robot position, heading, ball mass, rolling decel.
  s.robot.position = sample_annulus(ball_pos, annulus_inner, annulus_outer, p, robot_in_field, rng);
  s.robot.heading = wrap_angle(rng.uniform(-kPi, kPi));
  s.ball.mass = rng.uniform(p.ball_mass_min, p.ball_mass_max);
  s.ball.rolling_decel = rng.uniform(p.rolling_decel_min, p.rolling_decel_max);
  s.sim_time = 0.0;
  s.last_kick_time = -1e9;
  s.next_push_time = p.push_interval;
  s.active_push = {0.0, 0.0};
  return s;
}

}  // namespace

WorldState reset(Stage stage, const SimParams& p, Rng& rng) {
  if (stage == Stage::kChase) {
    return reset_common(stage, {0.0, 0.0}, p.annulus_chase_inner, p.annulus_chase_outer,
                        /*robot_in_field=*/false, p, rng);
  }
  const double bx = rng.uniform(p.ball_init_x_min, p.ball_init_x_max);
  const double by = rng.uniform(p.ball_init_y_min, p.ball_init_y_max);
  return reset_common(stage, {bx, by}, p.annulus_kick_inner, p.annulus_kick_outer,
                      /*robot_in_field=*/true, p, rng);
}

WorldState reset_kick_at(const Vec2& ball_pos, const SimParams& p, Rng& rng) {
  return reset_common(Stage::kKick, ball_pos, p.annulus_kick_inner, p.annulus_kick_outer,
                      /*robot_in_field=*/true, p, rng);
}

VelocityTarget target_velocity(const WorldState& s, const Command& cmd) {
  const Vec2 r = s.ball.position - s.robot.position;
  Vec2 dir;
  if (norm(r) < 1e-9) {
    dir = unit_from_angle(s.robot.heading);  // degenerate-input rule
  } else {
    dir = normalized(r);
  }
  const double theta = wrap_angle(std::atan2(dir.y, dir.x) - s.robot.heading);
  const double sign_theta = theta >= 0.0 ? 1.0 : -1.0;  // sign(0) = +1
  const double omega_mag = std::max(0.0, cmd.omega);
  return {cmd.vx * dir, omega_mag * sign_theta};
}

StepResult step(const WorldState& s0, const Action& raw_action, const SimParams& p, Rng& rng) {
  StepResult out;
  WorldState& s = out.state;
  StepEvents& ev = out.events;
  s = s0;

  const Action a = raw_action.clamped();
  const double dt = p.dt;

  // (a) base velocity relaxes toward the command; pose integrated by Euler.
  const Vec2 cmd_body{a.vx * p.max_body_speed, a.vy * p.max_body_speed};
  const double cmd_omega = a.omega * p.max_yaw_rate;
  const double alpha = std::min(1.0, dt / p.tau_base);
  s.robot.body_velocity += alpha * (cmd_body - s.robot.body_velocity);
  s.robot.yaw_rate += alpha * (cmd_omega - s.robot.yaw_rate);
  s.robot.position += dt * rotate(s.robot.body_velocity, s.robot.heading);
  s.robot.heading = wrap_angle(s.robot.heading + dt * s.robot.yaw_rate);

  // (f) gait phase advances only while the command asks for motion.
  if (norm(cmd_body) > 0.05) {
    s.robot.gait_phase = std::fmod(s.robot.gait_phase + kTwoPi * p.gait_frequency * dt, kTwoPi);
  }

  // (b) ball rolls with constant deceleration; trapezoidal position update so
  // constant-decel kinematics integrate exactly.
  {
    const double speed = norm(s.ball.velocity);
    if (speed > 0.0) {
      const Vec2 dir = s.ball.velocity * (1.0 / speed);
      const double new_speed = std::max(0.0, speed - s.ball.rolling_decel * dt);
      const Vec2 v_new = new_speed * dir;
      s.ball.position += dt * 0.5 * (s.ball.velocity + v_new);
      s.ball.velocity = new_speed < p.ball_stop_speed ? Vec2{0.0, 0.0} : v_new;
    }
  }

  const double t_new = s.sim_time + dt;

  // (c) kick: trigger channel armed, ball in the contact cone, cooldown over.
  const Vec2 to_ball = s.ball.position - s.robot.position;
  const double ball_dist = norm(to_ball);
  const double bearing = ball_bearing(s);
  const bool cone_ok = std::abs(bearing) <= p.kick_cone_half_angle;
  const bool kick_ready = t_new - s.last_kick_time >= p.kick_cooldown;
  if (p.kick_enabled && a.kick_trigger > 0.5 && ball_dist <= p.contact_radius && cone_ok &&
      kick_ready) {
    const double speed = p.kick_speed_max * (a.kick_trigger + 1.0) * 0.5;
    const double dir = s.robot.heading + a.kick_dir * p.kick_cone_half_angle;
    s.ball.velocity = speed * unit_from_angle(dir);
    s.last_kick_time = t_new;
    ev.kicked = true;
    ev.kick_velocity = s.ball.velocity;
  } else if (ball_dist < p.contact_radius) {
    // Incidental body contact: push the ball out at the body speed.
    const Vec2 dir = norm(to_ball) < 1e-9 ? unit_from_angle(s.robot.heading) : normalized(to_ball);
    s.ball.position = s.robot.position + p.contact_radius * dir;
    s.ball.velocity = robot_world_velocity(s);
  }

  s.sim_time = t_new;

  // (d) periodic ball perturbation. The epsilon keeps the cadence stable
  // against accumulated clock rounding.
  if (t_new >= s.next_push_time - 1e-9) {
    const double b = p.ball_push_speed_bound;
    const Vec2 delta{rng.uniform(-b, b), rng.uniform(-b, b)};
    s.ball.velocity += delta;
    s.active_push = delta;
    s.next_push_time += p.push_interval;
    ev.push_applied = true;
  }

  // (e) out-of-field ball: resample in an annulus around the exit position,
  // clipped into the field, velocity zeroed. The episode continues.
  if (!inside_field(s.ball.position, p)) {
    ev.ball_reset = true;
    ev.ball_exit_position = s.ball.position;
    const Vec2 raw = sample_annulus(s.ball.position, p.ball_reset_annulus_inner,
                                    p.ball_reset_annulus_outer, p, /*keep_in_field=*/false, rng);
    s.ball.position = clamp_to_field(raw, p, p.boundary_margin);
    s.ball.velocity = {0.0, 0.0};
  }

  if (!state_finite(s)) {
    ev.terminated = true;
    ev.reason = Termination::kFallProxy;
  } else if (t_new >= p.timeout(s.stage) - 1e-9) {
    ev.terminated = true;
    ev.reason = Termination::kTimeout;
  }
  return out;
}

}  // namespace striker::world
