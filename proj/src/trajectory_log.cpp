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

#include "striker/trajectory_log.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "striker/svg.hpp"

namespace striker::evalkit {

using nlohmann::json;

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("trajectory: cannot write " + path);
  json header;
  header["goal"] = {traj.goal_x, 0.0};
  header["goal_half_width"] = traj.goal_half_width;
  header["field"] = {traj.field_half_length, traj.field_half_width};
  header["dt"] = traj.dt;
  header["ball_start"] = {traj.ball_start.x, traj.ball_start.y};
  out << header.dump() << "\n";
  for (const auto& s : traj.steps) {
    json j;
    j["t"] = s.t;
    j["robot"] = {s.robot.x, s.robot.y, s.heading};
    j["ball"] = {s.ball.x, s.ball.y};
    j["ball_motion_end"] = {s.ball_motion_end.x, s.ball_motion_end.y};
    j["vball"] = {s.ball_velocity.x, s.ball_velocity.y};
    j["kicked"] = s.kicked;
    if (s.kicked) j["kick_velocity"] = {s.kick_velocity.x, s.kick_velocity.y};
    j["ball_reset"] = s.ball_reset;
    j["c_regu"] = s.c_regu;
    j["dist"] = s.robot_ball_dist;
    out << j.dump() << "\n";
  }
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trajectory: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory: empty file " + path);
  Trajectory traj;
  {
    const json header = json::parse(line);
    traj.goal_x = header.at("goal")[0].get<double>();
    traj.goal_half_width = header.at("goal_half_width").get<double>();
    traj.field_half_length = header.at("field")[0].get<double>();
    traj.field_half_width = header.at("field")[1].get<double>();
    traj.dt = header.at("dt").get<double>();
    traj.ball_start = {header.at("ball_start")[0].get<double>(),
                       header.at("ball_start")[1].get<double>()};
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TrajStep s;
    s.t = j.at("t").get<double>();
    s.robot = {j.at("robot")[0].get<double>(), j.at("robot")[1].get<double>()};
    s.heading = j.at("robot")[2].get<double>();
    s.ball = {j.at("ball")[0].get<double>(), j.at("ball")[1].get<double>()};
    s.ball_motion_end = {j.at("ball_motion_end")[0].get<double>(),
                         j.at("ball_motion_end")[1].get<double>()};
    s.ball_velocity = {j.at("vball")[0].get<double>(), j.at("vball")[1].get<double>()};
    s.kicked = j.at("kicked").get<bool>();
    if (s.kicked) {
      s.kick_velocity = {j.at("kick_velocity")[0].get<double>(),
                         j.at("kick_velocity")[1].get<double>()};
    }
    s.ball_reset = j.at("ball_reset").get<bool>();
    s.c_regu = j.at("c_regu").get<double>();
    s.robot_ball_dist = j.at("dist").get<double>();
    traj.steps.push_back(s);
  }
  return traj;
}

int render_frames(const Trajectory& traj, const std::string& out_dir, int stride) {
  if (stride < 1) stride = 1;
  std::filesystem::create_directories(out_dir);
  const double scale = 60.0;  // px per meter
  const double margin = 20.0;
  const double w = 2 * traj.field_half_length * scale + 2 * margin;
  const double h = 2 * traj.field_half_width * scale + 2 * margin;
  auto px = [&](const Vec2& p) {
    return Vec2{margin + (p.x + traj.field_half_length) * scale,
                margin + (traj.field_half_width - p.y) * scale};
  };

  int frames = 0;
  for (size_t i = 0; i < traj.steps.size(); i += static_cast<size_t>(stride)) {
    const TrajStep& s = traj.steps[i];
    svg::Writer img(w, h);
    img.rect(0, 0, w, h, "#ffffff");
    img.rect(margin, margin, 2 * traj.field_half_length * scale,
             2 * traj.field_half_width * scale, "#e8f5e9", "#2e7d32", 2.0);
    // Goal mouth on the +x line.
    const Vec2 post_a = px({traj.goal_x, traj.goal_half_width});
    const Vec2 post_b = px({traj.goal_x, -traj.goal_half_width});
    img.line(post_a.x, post_a.y, post_b.x, post_b.y, "#d32f2f", 5.0);

    const Vec2 rp = px(s.robot);
    img.circle(rp.x, rp.y, 0.25 * scale, "#1565c0");
    const Vec2 tip = px(s.robot + 0.45 * unit_from_angle(s.heading));
    img.line(rp.x, rp.y, tip.x, tip.y, "#0d2c54", 3.0);

    const Vec2 bp = px(s.ball);
    img.circle(bp.x, bp.y, 0.11 * scale, s.kicked ? "#f57f17" : "#212121");

    char label[64];
    std::snprintf(label, sizeof(label), "t = %.2f s", s.t);
    img.text(margin + 4, margin - 6, label, 14, "#000000", "start");

    char name[64];
    std::snprintf(name, sizeof(name), "frame_%06zu.svg", i);
    svg::write_file(out_dir + "/" + name, img.finish());
    ++frames;
  }
  return frames;
}

}  // namespace striker::evalkit
