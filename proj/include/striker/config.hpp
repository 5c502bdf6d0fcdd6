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

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "striker/algos.hpp"
#include "striker/distill.hpp"
#include "striker/envside.hpp"

namespace striker::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Whole-run configuration. Every field is reachable through a flat dotted key
// (see schema()) from the JSON config file and from repeated --set overrides.
struct Config {
  world::SimParams sim;
  bool chase_kick_enabled = false;  // the chase task trains pursuit, not kicks
  rewards::RewardWeights chase_weights = rewards::RewardWeights::chase();
  rewards::RewardWeights kick_weights = rewards::RewardWeights::kick();
  perception::NoiseParams noise;
  double ball_period = 0.1;

  // Command sampling (per episode).
  double cmd_speed_min = 0.3;
  double cmd_speed_max = 1.0;
  double cmd_omega_min = 0.8;
  double cmd_omega_max = 2.0;

  // Shared training shape.
  int num_envs = 16;
  int rollout_len = 1024;
  int workers = 0;  // 0 -> hardware concurrency

  algos::PpoConfig ppo;
  double fixed_reg_coef = 1.0;  // fixed regularization coefficient, stages 1-2

  uint64_t stage1_steps = 2'000'000;
  uint64_t stage2_steps = 3'000'000;
  uint64_t stage4_steps = 2'000'000;
  bool stage2_reset_value = false;
  int stage4_value_warmup_iters = 4;
  double stage4_lr_scale = 0.5;
  double stage4_init_log_std = -1.6;  // fine-tuning exploration scale
  double stage4_entropy_coef = 5e-4;
  double stage4_push_bound_factor = 0.5;
  double stage4_push_interval_factor = 2.0;

  algos::DaggerConfig dagger;
  int dagger_rounds = 8;
  int h_estimate_steps = 20000;

  double np3o_kappa = 2.0;
  double np3o_h_override = std::numeric_limits<double>::quiet_NaN();

  int eval_trials = 50;
  int eval_horizon_steps = 1000;
  bool eval_stop_on_success = true;
  int chase_eval_episodes = 200;
  double chase_eval_dist = 0.6;

  // Derived views.
  pipeline::EnvSettings env_settings(world::Stage stage) const;
};

struct KeyDef {
  std::string key;
  std::string doc;
  std::function<nlohmann::json(const Config&)> get;
  std::function<void(Config&, const nlohmann::json&)> set;
};

const std::vector<KeyDef>& schema();

Config default_config();

// Loads a JSON config file; nested objects map to dotted keys. Unknown keys
// are rejected with the full valid-key list in the error message.
Config load_file(const std::string& path);

// Applies "key=value" overrides in order.
void apply_overrides(Config& cfg, const std::vector<std::string>& overrides);

// One line per key: key, default, doc. Drift-checked against schema() in tests.
std::string config_doc();

nlohmann::json to_json(const Config& cfg);

}  // namespace striker::config
