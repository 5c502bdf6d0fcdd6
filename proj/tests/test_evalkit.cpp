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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "striker/evalkit.hpp"

using namespace striker;
using namespace striker::evalkit;

namespace {

Trajectory base_traj() {
  Trajectory t;
  t.goal_x = 7.0;
  t.goal_half_width = 1.3;
  t.dt = 0.02;
  t.ball_start = {3.0, 0.0};
  return t;
}

TrajStep make_step(double t, const Vec2& ball, const Vec2& vball) {
  TrajStep s;
  s.t = t;
  s.robot = {0, 0};
  s.ball = ball;
  s.ball_motion_end = ball;
  s.ball_velocity = vball;
  s.robot_ball_dist = norm(ball - s.robot);
  return s;
}

std::filesystem::path test_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "striker_evalkit_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("trial_metrics: straight kick toward the goal scores accuracy 1") {
  Trajectory traj = base_traj();
  TrajStep kick = make_step(0.02, {3.0, 0.0}, {4.0, 0.0});
  kick.kicked = true;
  kick.kick_velocity = {4.0, 0.0};
  traj.steps.push_back(kick);
  // Ball travels to and across the goal line at y = 0.
  traj.steps.push_back(make_step(0.04, {6.5, 0.0}, {3.5, 0.0}));
  traj.steps.push_back(make_step(0.06, {7.2, 0.0}, {3.0, 0.0}));
  const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
  CHECK(rec.success);
  CHECK(rec.kicks == 1);
  CHECK(rec.accuracy_defined);
  CHECK(rec.kick_accuracy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rec.max_ball_speed == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("trial_metrics: 45-degree kick gives cos(45) accuracy") {
  Trajectory traj = base_traj();
  // Ball at (3,0), goal direction +x; kick at 45 degrees.
  TrajStep kick = make_step(0.02, {3.0, 0.0}, {2.0, 2.0});
  kick.kicked = true;
  kick.kick_velocity = {2.0, 2.0};
  traj.steps.push_back(kick);
  const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
  CHECK(rec.accuracy_defined);
  CHECK(rec.kick_accuracy == doctest::Approx(0.7071068).epsilon(1e-6));
  CHECK_FALSE(rec.success);
}

TEST_CASE("trial_metrics: crossing boundary convention at the posts") {
  // Crossing exactly at the post: success (closed interval).
  {
    Trajectory traj = base_traj();
    TrajStep kick = make_step(0.02, {6.9, 1.3}, {1.0, 0.0});
    kick.kicked = true;
    kick.kick_velocity = {1.0, 0.0};
    traj.steps.push_back(kick);
    traj.steps.push_back(make_step(0.04, {7.1, 1.3}, {1.0, 0.0}));
    const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
    CHECK(rec.success);
  }
  // Crossing at post + 0.01: failure.
  {
    Trajectory traj = base_traj();
    TrajStep kick = make_step(0.02, {6.9, 1.31}, {1.0, 0.0});
    kick.kicked = true;
    kick.kick_velocity = {1.0, 0.0};
    traj.steps.push_back(kick);
    traj.steps.push_back(make_step(0.04, {7.1, 1.31}, {1.0, 0.0}));
    const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
    CHECK_FALSE(rec.success);
  }
}

TEST_CASE("trial_metrics: goal crossing without a kick does not count as success") {
  Trajectory traj = base_traj();
  traj.steps.push_back(make_step(0.02, {6.9, 0.0}, {1.0, 0.0}));
  traj.steps.push_back(make_step(0.04, {7.1, 0.0}, {1.0, 0.0}));
  const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
  CHECK_FALSE(rec.success);
  CHECK_FALSE(rec.accuracy_defined);
  CHECK(rec.kicks == 0);
}

TEST_CASE("trial_metrics: reset teleports are not treated as ball motion") {
  Trajectory traj = base_traj();
  // Ball exits at (7.2, 3.0) far outside the mouth, then teleports to (5, 0):
  // the teleport segment (7.2,3) -> (5,0)... must not be crossing-checked.
  TrajStep kick = make_step(0.02, {6.9, 3.0}, {2.0, 0.0});
  kick.kicked = true;
  kick.kick_velocity = {2.0, 0.0};
  traj.steps.push_back(kick);
  TrajStep exit = make_step(0.04, {5.0, 0.0}, {0.0, 0.0});
  exit.ball_motion_end = {7.2, 3.0};  // outside the mouth
  exit.ball_reset = true;
  traj.steps.push_back(exit);
  // Next segment starts from the teleported position (5, 0), no crossing.
  traj.steps.push_back(make_step(0.06, {5.0, 0.0}, {0.0, 0.0}));
  const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
  CHECK_FALSE(rec.success);
}

TEST_CASE("trial_metrics: energy window restricted to near-ball steps") {
  Trajectory traj = base_traj();
  TrajStep near = make_step(0.02, {0.3, 0.0}, {0, 0});
  near.kicked = true;
  near.kick_velocity = {1.0, 0.0};
  near.c_regu = 2.0;
  traj.steps.push_back(near);
  TrajStep near2 = make_step(0.04, {0.4, 0.0}, {0, 0});
  near2.c_regu = 4.0;
  traj.steps.push_back(near2);
  TrajStep far = make_step(0.06, {3.0, 0.0}, {0, 0});
  far.c_regu = 100.0;  // outside the 0.5 m window, ignored
  traj.steps.push_back(far);
  const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width);
  CHECK(rec.energy_defined);
  // (2 + 4) over 2 steps of 0.02 s -> 150 effort/s.
  CHECK(rec.energy_cost == doctest::Approx(150.0).epsilon(1e-12));
  CHECK(rec.steps_near_ball == 2);
}

TEST_CASE("trial_metrics: violation counting against a threshold") {
  Trajectory traj = base_traj();
  for (int i = 0; i < 10; ++i) {
    TrajStep s = make_step(0.02 * (i + 1), {3.0, 0.0}, {0, 0});
    s.c_regu = i < 3 ? 1.0 : 0.01;
    traj.steps.push_back(s);
  }
  const TrialRecord rec = trial_metrics(traj, traj.goal_x, traj.goal_half_width, 0.5);
  CHECK(rec.cost_violations == 3);
}

TEST_CASE("evaluate_grid: cell centers match the protocol") {
  MetricsGrid grid;
  CHECK(grid.cell_center(0, 0).x == doctest::Approx(-1.5));
  CHECK(grid.cell_center(0, 0).y == doctest::Approx(-4.0));
  CHECK(grid.cell_center(8, 8).x == doctest::Approx(6.5));
  CHECK(grid.cell_center(8, 8).y == doctest::Approx(4.0));
  CHECK(grid.cell_center(4, 4).x == doctest::Approx(2.5));
  CHECK(grid.cell_center(4, 4).y == doctest::Approx(0.0));
}

namespace {

MetricsGrid tiny_grid_eval(uint64_t seed, EvalSummary* summary) {
  net::ParamBundle<float> policy = net::make_student<float>(net::StudentDesc::make_default());
  Rng rng(3);
  net::init_params(policy, rng);
  pipeline::EnvSettings env = pipeline::EnvSettings::for_stage(world::Stage::kKick);
  env.perception_enabled = true;
  EvalConfig cfg;
  cfg.trials = 1;
  cfg.horizon_steps = 120;
  cfg.workers = 2;
  return evaluate_grid(policy, env, cfg, seed, summary);
}

}  // namespace

TEST_CASE("evaluate_grid: deterministic under seed, 81 cells, random policy scores ~0") {
  EvalSummary s1, s2;
  const MetricsGrid g1 = tiny_grid_eval(77, &s1);
  const MetricsGrid g2 = tiny_grid_eval(77, &s2);
  REQUIRE(g1.cells.size() == 81);
  for (size_t i = 0; i < g1.cells.size(); ++i) {
    CHECK(g1.cells[i].success_rate == g2.cells[i].success_rate);
    CHECK(g1.cells[i].max_ball_speed == g2.cells[i].max_ball_speed);
    CHECK(g1.cells[i].trials == 1);
  }
  CHECK(s1.success_rate == s2.success_rate);
  CHECK(s1.success_rate < 0.05);  // an untrained policy does not score
}

TEST_CASE("emit_outputs: CSV schema, SVG structure, summary consistency") {
  EvalSummary summary;
  const MetricsGrid grid = tiny_grid_eval(91, &summary);
  const auto dir = test_dir() / "outputs";
  emit_outputs(grid, summary, dir.string());

  // CSV: header + 81 rows.
  std::ifstream csv(dir / "grid.csv");
  REQUIRE(csv);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "cell_x,cell_y,success_rate,kick_accuracy,max_ball_speed,energy_cost,trials");
  int rows = 0;
  double success_sum = 0.0;
  int trial_sum = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 7);
    success_sum += std::stod(fields[2]) * std::stoi(fields[6]);
    trial_sum += std::stoi(fields[6]);
  }
  CHECK(rows == 81);
  // Overall mean equals the trial-weighted cell mean (6-decimal quantization).
  CHECK(success_sum / trial_sum == doctest::Approx(summary.success_rate).epsilon(1e-4));

  for (const char* name :
       {"success_rate.svg", "kick_accuracy.svg", "max_ball_speed.svg", "energy_cost.svg"}) {
    std::ifstream svg_file(dir / name);
    REQUIRE(svg_file);
    std::ostringstream ss;
    ss << svg_file.rdbuf();
    const std::string content = ss.str();
    CHECK(content.find("<svg") != std::string::npos);
    size_t rects = 0, pos = 0;
    while ((pos = content.find("<rect", pos)) != std::string::npos) {
      ++rects;
      pos += 5;
    }
    CHECK(rects >= 81);
  }

  std::ifstream summary_file(dir / "summary.jsonl");
  REQUIRE(summary_file);
  std::getline(summary_file, line);
  CHECK(line.find("success_rate") != std::string::npos);
}

TEST_CASE("summarize: overall means equal trial-weighted cell means") {
  EvalSummary from_eval;
  const MetricsGrid grid = tiny_grid_eval(55, &from_eval);
  const EvalSummary recomputed = summarize(grid);
  CHECK(recomputed.success_rate == doctest::Approx(from_eval.success_rate).epsilon(1e-12));
  CHECK(recomputed.max_ball_speed == doctest::Approx(from_eval.max_ball_speed).epsilon(1e-12));
  CHECK(recomputed.kick_accuracy == doctest::Approx(from_eval.kick_accuracy).epsilon(1e-12));
}

TEST_CASE("trajectory log: save/load round trip and frame rendering") {
  Trajectory traj = base_traj();
  TrajStep kick = make_step(0.02, {3.0, 0.0}, {4.0, 0.0});
  kick.kicked = true;
  kick.kick_velocity = {4.0, 0.0};
  traj.steps.push_back(kick);
  traj.steps.push_back(make_step(0.04, {3.1, 0.0}, {3.9, 0.0}));

  const auto dir = test_dir();
  const std::string path = (dir / "traj.jsonl").string();
  save_trajectory(path, traj);
  const Trajectory back = load_trajectory(path);
  REQUIRE(back.steps.size() == traj.steps.size());
  CHECK(back.steps[0].kicked);
  CHECK(back.steps[0].kick_velocity.x == doctest::Approx(4.0));
  CHECK(back.goal_half_width == traj.goal_half_width);

  const int frames = render_frames(back, (dir / "frames").string(), 1);
  CHECK(frames == 2);
  CHECK(std::filesystem::exists(dir / "frames" / "frame_000000.svg"));
}

TEST_CASE("ablation_table formats both arms") {
  EvalSummary a, b;
  a.success_rate = 0.7;
  b.success_rate = 0.5;
  const std::string table = ablation_table("np3o", a, "ppo-1.0", b);
  CHECK(table.find("np3o") != std::string::npos);
  CHECK(table.find("ppo-1.0") != std::string::npos);
  CHECK(table.find("success_rate") != std::string::npos);
}
