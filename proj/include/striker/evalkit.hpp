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

#include <optional>
#include <string>
#include <vector>

#include "striker/envside.hpp"
#include "striker/net.hpp"
#include "striker/trajectory_log.hpp"

namespace striker::evalkit {

struct TrialRecord {
  int cell_ix = 0;
  int cell_iy = 0;
  uint64_t seed = 0;
  bool success = false;
  bool accuracy_defined = false;
  double kick_accuracy = 0.0;        // mean cosine over kicks
  double first_kick_accuracy = 0.0;  // cosine of the first kick
  double max_ball_speed = 0.0;
  bool energy_defined = false;
  double energy_cost = 0.0;  // effort-units per second within 0.5 m of the ball
  int steps = 0;
  int kicks = 0;
  int steps_near_ball = 0;
  int cost_violations = 0;  // steps with c_regu > h (when h is provided)
  bool discarded = false;   // non-finite metric
};

struct CellStats {
  double x = 0.0, y = 0.0;
  double success_rate = 0.0;
  double kick_accuracy = std::numeric_limits<double>::quiet_NaN();
  double max_ball_speed = 0.0;
  double energy_cost = std::numeric_limits<double>::quiet_NaN();
  int trials = 0;
  int accuracy_trials = 0;
  int energy_trials = 0;
};

// 9x9 aggregate over the kick-stage ball-init region at 1 m spacing.
struct MetricsGrid {
  int nx = 9, ny = 9;
  double x0 = -1.5, y0 = -4.0, dx = 1.0, dy = 1.0;
  std::vector<CellStats> cells;  // index = ix * ny + iy

  const CellStats& cell(int ix, int iy) const { return cells[ix * ny + iy]; }
  Vec2 cell_center(int ix, int iy) const { return {x0 + ix * dx, y0 + iy * dy}; }
};

struct EvalSummary {
  double success_rate = 0.0;
  double kick_accuracy = 0.0;
  double max_ball_speed = 0.0;
  double energy_cost = 0.0;
  double violation_fraction = 0.0;  // steps with c_regu > h across all trials
  int trials = 0;
  int discarded = 0;
  int64_t total_steps = 0;
};

struct EvalConfig {
  int trials = 50;
  int horizon_steps = 1000;
  bool stop_on_success = true;
  int workers = 0;
  double h_for_violation = std::numeric_limits<double>::quiet_NaN();
  std::string record_dir;  // when set, dumps the first `record_limit` trajectories
  int record_limit = 0;
};

// Metrics of one recorded trial. Success is a goal-line crossing between the
// posts (closed interval at the posts) with at least one kick beforehand;
// accuracy is the cosine between each kick's velocity and the ball-goal
// direction at the kick instant; energy is the mean per-second regularization
// cost within 0.5 m of the ball.
TrialRecord trial_metrics(const Trajectory& traj, double goal_x, double goal_half_width,
                          double h_for_violation = std::numeric_limits<double>::quiet_NaN());

// Runs trials per cell with the deterministic policy; per-trial seeds derive
// from (seed, cell index, trial index) so results do not depend on worker
// count. Trials with non-finite metrics are discarded and counted.
MetricsGrid evaluate_grid(const net::ParamBundle<float>& policy,
                          const pipeline::EnvSettings& env_settings, const EvalConfig& cfg,
                          uint64_t seed, EvalSummary* summary_out = nullptr);

// CSV (header + one row per cell, 6-decimal fixed point), four SVG heatmaps,
// and a one-line JSON summary.
void emit_outputs(const MetricsGrid& grid, const EvalSummary& summary,
                  const std::string& out_dir);

EvalSummary summarize(const MetricsGrid& grid);

// Side-by-side comparison of two evaluated policies (same metric definitions).
std::string ablation_table(const std::string& name_a, const EvalSummary& a,
                           const std::string& name_b, const EvalSummary& b);

}  // namespace striker::evalkit
