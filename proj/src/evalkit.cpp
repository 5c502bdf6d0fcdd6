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

#include "striker/evalkit.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "striker/svg.hpp"
#include "striker/threading.hpp"

namespace striker::evalkit {

namespace {

// True when the directed segment a->b crosses the goal line inside the mouth
// (closed interval at the posts).
bool crosses_goal(const Vec2& a, const Vec2& b, double goal_x, double half_width) {
  if (a.x == b.x) return false;
  if (!((a.x < goal_x && b.x >= goal_x) || (a.x > goal_x && b.x <= goal_x))) return false;
  const double s = (goal_x - a.x) / (b.x - a.x);
  if (s < 0.0 || s > 1.0) return false;
  const double y = a.y + s * (b.y - a.y);
  return y >= -half_width && y <= half_width;
}

}  // namespace

TrialRecord trial_metrics(const Trajectory& traj, double goal_x, double goal_half_width,
                          double h_for_violation) {
  TrialRecord rec;
  const Vec2 goal{goal_x, 0.0};
  Vec2 prev_ball = traj.ball_start;
  bool crossed = false;
  double accuracy_sum = 0.0;
  double energy_sum = 0.0;

  for (const auto& s : traj.steps) {
    rec.steps += 1;
    if (!crossed && crosses_goal(prev_ball, s.ball_motion_end, goal_x, goal_half_width)) {
      crossed = true;
    }
    if (s.kicked) {
      rec.kicks += 1;
      const Vec2 dir = rewards::goal_direction(goal, s.ball_motion_end);
      const double cosine = dot(normalized(s.kick_velocity), dir);
      accuracy_sum += cosine;
      if (rec.kicks == 1) rec.first_kick_accuracy = cosine;
    }
    rec.max_ball_speed = std::max(rec.max_ball_speed, norm(s.ball_velocity));
    if (s.kicked) rec.max_ball_speed = std::max(rec.max_ball_speed, norm(s.kick_velocity));
    if (s.robot_ball_dist < 0.5) {
      rec.steps_near_ball += 1;
      energy_sum += s.c_regu;
    }
    if (std::isfinite(h_for_violation) && s.c_regu > h_for_violation) rec.cost_violations += 1;
    prev_ball = s.ball;
  }

  rec.success = crossed && rec.kicks >= 1;
  if (rec.kicks > 0) {
    rec.accuracy_defined = true;
    rec.kick_accuracy = accuracy_sum / rec.kicks;
  }
  if (rec.steps_near_ball > 0) {
    rec.energy_defined = true;
    energy_sum /= rec.steps_near_ball * traj.dt;
    rec.energy_cost = energy_sum;
  }
  if (!std::isfinite(rec.max_ball_speed) ||
      (rec.accuracy_defined && !std::isfinite(rec.kick_accuracy)) ||
      (rec.energy_defined && !std::isfinite(rec.energy_cost))) {
    rec.discarded = true;
  }
  return rec;
}

namespace {

struct CellAccum {
  int trials = 0, successes = 0, accuracy_trials = 0, energy_trials = 0, discarded = 0;
  double accuracy_sum = 0.0, speed_sum = 0.0, energy_sum = 0.0;
  int64_t steps = 0;
  int64_t violations = 0;
};

TrialRecord run_trial(const net::ParamBundle<float>& policy,
                      const pipeline::EnvSettings& env_settings, const EvalConfig& cfg,
                      const Vec2& ball_pos, uint64_t trial_seed, Trajectory* record) {
  pipeline::EnvInstance env(env_settings, trial_seed);
  env.reset_episode_at(ball_pos);

  const bool student = policy.kind == net::ArchKind::kStudent;
  const int obs_dim = student ? policy.student.obs_dim : policy.teacher.obs_dim;
  const int hist_dim = student ? policy.student.obs_dim * policy.student.history : 0;
  net::Matrix<float> obs(obs_dim, 1), hist(std::max(1, hist_dim), 1), mean;

  Trajectory traj;
  traj.goal_x = env_settings.sim.goal_x;
  traj.goal_half_width = env_settings.sim.goal_half_width;
  traj.field_half_length = env_settings.sim.field_half_length;
  traj.field_half_width = env_settings.sim.field_half_width;
  traj.dt = env_settings.sim.dt;
  traj.ball_start = env.state().ball.position;

  Vec2 prev_ball = traj.ball_start;
  bool success_seen = false;
  for (int t = 0; t < cfg.horizon_steps; ++t) {
    if (student) {
      env.history().copy_to(hist.data());
      for (int d = 0; d < obs_dim; ++d) obs(d, 0) = env.student_frame().v[d];
      net::forward_student<float>(policy, hist, obs, &mean, nullptr, nullptr, nullptr, false);
    } else {
      const perception::PrivilegedFrame f = env.teacher_frame();
      for (int d = 0; d < obs_dim; ++d) obs(d, 0) = f.v[d];
      net::forward_teacher<float>(policy, obs, &mean, nullptr, nullptr, nullptr, false);
    }
    world::Action act;
    act.vx = mean(0, 0);
    act.vy = mean(1, 0);
    act.omega = mean(2, 0);
    act.kick_trigger = mean(3, 0);
    act.kick_dir = mean(4, 0);
    const auto outcome = env.step(act);

    TrajStep step;
    step.t = env.state().sim_time;
    step.robot = env.state().robot.position;
    step.heading = env.state().robot.heading;
    step.ball = env.state().ball.position;
    step.ball_motion_end =
        outcome.events.ball_reset ? outcome.events.ball_exit_position : env.state().ball.position;
    step.ball_velocity = env.state().ball.velocity;
    step.kicked = outcome.events.kicked;
    step.kick_velocity = outcome.events.kick_velocity;
    step.ball_reset = outcome.events.ball_reset;
    step.c_regu = outcome.reward.c_regu;
    step.robot_ball_dist = norm(env.state().ball.position - env.state().robot.position);
    traj.steps.push_back(step);

    if (!success_seen &&
        crosses_goal(prev_ball, step.ball_motion_end, traj.goal_x, traj.goal_half_width)) {
      success_seen = true;
      if (cfg.stop_on_success) break;
    }
    prev_ball = step.ball;
    if (outcome.events.terminated) break;
  }

  if (record) *record = traj;
  return trial_metrics(traj, traj.goal_x, traj.goal_half_width, cfg.h_for_violation);
}

}  // namespace

MetricsGrid evaluate_grid(const net::ParamBundle<float>& policy,
                          const pipeline::EnvSettings& env_settings, const EvalConfig& cfg,
                          uint64_t seed, EvalSummary* summary_out) {
  if (cfg.trials < 1) throw std::invalid_argument("evaluate_grid: trials must be >= 1");
  MetricsGrid grid;
  grid.cells.resize(grid.nx * grid.ny);
  std::vector<CellAccum> accums(grid.cells.size());
  std::mutex record_mutex;
  std::atomic<int> recorded{0};

  parallel_chunks(grid.nx * grid.ny, cfg.workers, [&](int cell) {
    const int ix = cell / grid.ny;
    const int iy = cell % grid.ny;
    const Vec2 center = grid.cell_center(ix, iy);
    CellAccum& acc = accums[cell];
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const uint64_t trial_seed = derive_seed(seed, 0x6576616cULL + cell, trial);
      Trajectory traj;
      const bool want_record =
          !cfg.record_dir.empty() && recorded.load(std::memory_order_relaxed) < cfg.record_limit;
      const TrialRecord rec = run_trial(policy, env_settings, cfg, center, trial_seed,
                                        want_record ? &traj : nullptr);
      if (want_record) {
        std::lock_guard<std::mutex> lock(record_mutex);
        if (recorded.load(std::memory_order_relaxed) < cfg.record_limit) {
          char name[80];
          std::snprintf(name, sizeof(name), "trial_c%02d_%02d_t%03d.jsonl", ix, iy, trial);
          save_trajectory(cfg.record_dir + "/" + std::string(name), traj);
          recorded.fetch_add(1, std::memory_order_relaxed);
        }
      }
      if (rec.discarded) {
        ++acc.discarded;
        continue;  // never averaged silently
      }
      ++acc.trials;
      acc.successes += rec.success ? 1 : 0;
      if (rec.accuracy_defined) {
        ++acc.accuracy_trials;
        acc.accuracy_sum += rec.kick_accuracy;
      }
      if (rec.energy_defined) {
        ++acc.energy_trials;
        acc.energy_sum += rec.energy_cost;
      }
      acc.speed_sum += rec.max_ball_speed;
      acc.steps += rec.steps;
      acc.violations += rec.cost_violations;
    }
  });

  EvalSummary summary;
  for (int cell = 0; cell < grid.nx * grid.ny; ++cell) {
    const int ix = cell / grid.ny;
    const int iy = cell % grid.ny;
    const CellAccum& acc = accums[cell];
    CellStats& st = grid.cells[cell];
    const Vec2 center = grid.cell_center(ix, iy);
    st.x = center.x;
    st.y = center.y;
    st.trials = acc.trials;
    st.accuracy_trials = acc.accuracy_trials;
    st.energy_trials = acc.energy_trials;
    if (acc.trials > 0) {
      st.success_rate = static_cast<double>(acc.successes) / acc.trials;
      st.max_ball_speed = acc.speed_sum / acc.trials;
    }
    if (acc.accuracy_trials > 0) st.kick_accuracy = acc.accuracy_sum / acc.accuracy_trials;
    if (acc.energy_trials > 0) st.energy_cost = acc.energy_sum / acc.energy_trials;
    summary.trials += acc.trials;
    summary.discarded += acc.discarded;
    summary.total_steps += acc.steps;
    summary.violation_fraction += static_cast<double>(acc.violations);
    summary.success_rate += acc.successes;
    summary.kick_accuracy += acc.accuracy_sum;
    summary.max_ball_speed += acc.speed_sum;
    summary.energy_cost += acc.energy_sum;
  }
  int accuracy_trials = 0, energy_trials = 0;
  for (const auto& acc : accums) {
    accuracy_trials += acc.accuracy_trials;
    energy_trials += acc.energy_trials;
  }
  if (summary.trials > 0) {
    summary.success_rate /= summary.trials;
    summary.max_ball_speed /= summary.trials;
  }
  summary.kick_accuracy = accuracy_trials > 0 ? summary.kick_accuracy / accuracy_trials : 0.0;
  summary.energy_cost = energy_trials > 0 ? summary.energy_cost / energy_trials : 0.0;
  summary.violation_fraction =
      summary.total_steps > 0 ? summary.violation_fraction / summary.total_steps : 0.0;
  if (summary_out) *summary_out = summary;
  return grid;
}

EvalSummary summarize(const MetricsGrid& grid) {
  EvalSummary s;
  int accuracy_trials = 0, energy_trials = 0;
  for (const auto& c : grid.cells) {
    s.trials += c.trials;
    s.success_rate += c.success_rate * c.trials;
    s.max_ball_speed += c.max_ball_speed * c.trials;
    if (c.accuracy_trials > 0) {
      s.kick_accuracy += c.kick_accuracy * c.accuracy_trials;
      accuracy_trials += c.accuracy_trials;
    }
    if (c.energy_trials > 0) {
      s.energy_cost += c.energy_cost * c.energy_trials;
      energy_trials += c.energy_trials;
    }
  }
  if (s.trials > 0) {
    s.success_rate /= s.trials;
    s.max_ball_speed /= s.trials;
  }
  s.kick_accuracy = accuracy_trials > 0 ? s.kick_accuracy / accuracy_trials : 0.0;
  s.energy_cost = energy_trials > 0 ? s.energy_cost / energy_trials : 0.0;
  return s;
}

void emit_outputs(const MetricsGrid& grid, const EvalSummary& summary,
                  const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  // CSV, 6-decimal fixed point.
  {
    std::ofstream csv(out_dir + "/grid.csv", std::ios::trunc);
    if (!csv) throw std::runtime_error("emit_outputs: cannot write grid.csv");
    csv << "cell_x,cell_y,success_rate,kick_accuracy,max_ball_speed,energy_cost,trials\n";
    char line[256];
    for (int ix = 0; ix < grid.nx; ++ix) {
      for (int iy = 0; iy < grid.ny; ++iy) {
        const CellStats& c = grid.cell(ix, iy);
        std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", c.x, c.y,
                      c.success_rate, c.kick_accuracy, c.max_ball_speed, c.energy_cost, c.trials);
        csv << line;
      }
    }
  }

  // SVG heatmaps.
  struct MetricView {
    const char* name;
    const char* title;
    double (*get)(const CellStats&);
  };
  const MetricView metrics[4] = {
      {"success_rate", "success rate", [](const CellStats& c) { return c.success_rate; }},
      {"kick_accuracy", "kick accuracy", [](const CellStats& c) { return c.kick_accuracy; }},
      {"max_ball_speed", "max ball speed (m/s)",
       [](const CellStats& c) { return c.max_ball_speed; }},
      {"energy_cost", "energy cost (effort/s)",
       [](const CellStats& c) { return c.energy_cost; }},
  };
  const double cell_px = 64.0, margin = 40.0;
  for (const auto& metric : metrics) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : grid.cells) {
      const double v = metric.get(c);
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    const double w = margin * 2 + grid.nx * cell_px;
    const double h = margin * 2 + grid.ny * cell_px + 20.0;
    svg::Writer img(w, h);
    img.rect(0, 0, w, h, "#ffffff");
    img.text(w / 2, margin - 14, metric.title, 16);
    for (int ix = 0; ix < grid.nx; ++ix) {
      for (int iy = 0; iy < grid.ny; ++iy) {
        const CellStats& c = grid.cell(ix, iy);
        const double v = metric.get(c);
        // y axis points up: iy=0 (y=-4) at the bottom row.
        const double px = margin + ix * cell_px;
        const double py = margin + (grid.ny - 1 - iy) * cell_px;
        img.rect(px, py, cell_px, cell_px, svg::heat_color(v, lo, hi), "#ffffff", 1.0);
        char label[32];
        if (std::isfinite(v)) {
          std::snprintf(label, sizeof(label), "%.2f", v);
        } else {
          std::snprintf(label, sizeof(label), "n/a");
        }
        const double t = (std::isfinite(v) && hi > lo) ? (v - lo) / (hi - lo) : 0.0;
        img.text(px + cell_px / 2, py + cell_px / 2 + 4, label, 12,
                 t > 0.55 ? "#ffffff" : "#000000");
      }
    }
    char range[96];
    std::snprintf(range, sizeof(range), "min %.3f  max %.3f", lo, hi);
    img.text(w / 2, h - 10, range, 12);
    svg::write_file(out_dir + "/" + metric.name + ".svg", img.finish());
  }

  // One-line JSON summary.
  {
    nlohmann::json j;
    j["success_rate"] = summary.success_rate;
    j["kick_accuracy"] = summary.kick_accuracy;
    j["max_ball_speed"] = summary.max_ball_speed;
    j["energy_cost"] = summary.energy_cost;
    j["violation_fraction"] = summary.violation_fraction;
    j["trials"] = summary.trials;
    j["discarded"] = summary.discarded;
    std::ofstream out(out_dir + "/summary.jsonl", std::ios::trunc);
    if (!out) throw std::runtime_error("emit_outputs: cannot write summary.jsonl");
    out << j.dump() << "\n";
  }
}

std::string ablation_table(const std::string& name_a, const EvalSummary& a,
                           const std::string& name_b, const EvalSummary& b) {
  char buf[512];
  std::string out;
  out += "metric            ";
  std::snprintf(buf, sizeof(buf), "%16s %16s\n", name_a.c_str(), name_b.c_str());
  out += buf;
  auto row = [&](const char* name, double va, double vb) {
    std::snprintf(buf, sizeof(buf), "%-18s %16.4f %16.4f\n", name, va, vb);
    out += buf;
  };
  row("success_rate", a.success_rate, b.success_rate);
  row("kick_accuracy", a.kick_accuracy, b.kick_accuracy);
  row("max_ball_speed", a.max_ball_speed, b.max_ball_speed);
  row("energy_cost", a.energy_cost, b.energy_cost);
  row("violation_frac", a.violation_fraction, b.violation_fraction);
  return out;
}

}  // namespace striker::evalkit
