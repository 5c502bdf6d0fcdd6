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

#include "striker/config.hpp"

#include <fstream>
#include <sstream>

namespace striker::config {

pipeline::EnvSettings Config::env_settings(world::Stage stage) const {
  pipeline::EnvSettings s;
  s.sim = sim;
  s.sim.kick_enabled = stage == world::Stage::kKick ? sim.kick_enabled : chase_kick_enabled;
  s.stage = stage;
  s.weights = stage == world::Stage::kChase ? chase_weights : kick_weights;
  s.noise = noise;
  s.ball_period = ball_period;
  s.cmd_speed_min = cmd_speed_min;
  s.cmd_speed_max = cmd_speed_max;
  s.cmd_omega_min = cmd_omega_min;
  s.cmd_omega_max = cmd_omega_max;
  return s;
}

namespace {

template <typename T>
KeyDef make_key(const std::string& key, const std::string& doc, T Config::* field) {
  KeyDef def;
  def.key = key;
  def.doc = doc;
  def.get = [field](const Config& c) { return nlohmann::json(c.*field); };
  def.set = [field, key](Config& c, const nlohmann::json& v) {
    try {
      c.*field = v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: bad value type for key '" + key + "'");
    }
  };
  return def;
}

// Member-of-member accessor.
template <typename Sub, typename T>
KeyDef make_key(const std::string& key, const std::string& doc, Sub Config::* sub, T Sub::* field) {
  KeyDef def;
  def.key = key;
  def.doc = doc;
  def.get = [sub, field](const Config& c) { return nlohmann::json(c.*sub.*field); };
  def.set = [sub, field, key](Config& c, const nlohmann::json& v) {
    try {
      c.*sub.*field = v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: bad value type for key '" + key + "'");
    }
  };
  return def;
}

std::vector<KeyDef> build_schema() {
  using W = world::SimParams;
  using R = rewards::RewardWeights;
  using N = perception::NoiseParams;
  using P = algos::PpoConfig;
  using D = algos::DaggerConfig;
  std::vector<KeyDef> k;

  // world
  k.push_back(make_key<W, double>("world.dt", "control period (s)", &Config::sim, &W::dt));
  k.push_back(make_key<W, double>("world.tau_base", "base velocity lag time constant (s)",
                                  &Config::sim, &W::tau_base));
  k.push_back(make_key<W, double>("world.max_body_speed", "m/s at velocity action = 1",
                                  &Config::sim, &W::max_body_speed));
  k.push_back(make_key<W, double>("world.max_yaw_rate", "rad/s at yaw action = 1", &Config::sim,
                                  &W::max_yaw_rate));
  k.push_back(make_key<W, double>("world.gait_frequency", "gait cycle frequency (Hz)",
                                  &Config::sim, &W::gait_frequency));
  k.push_back(make_key<W, double>("world.field_half_length", "field half length (m)",
                                  &Config::sim, &W::field_half_length));
  k.push_back(make_key<W, double>("world.field_half_width", "field half width (m)", &Config::sim,
                                  &W::field_half_width));
  k.push_back(make_key<W, double>("world.goal_x", "goal line x (m)", &Config::sim, &W::goal_x));
  k.push_back(make_key<W, double>("world.goal_half_width", "half distance between posts (m)",
                                  &Config::sim, &W::goal_half_width));
  k.push_back(make_key<W, double>("world.contact_radius", "kick/contact radius (m)", &Config::sim,
                                  &W::contact_radius));
  k.push_back(make_key<W, double>("world.kick_cone_half_angle", "kick cone half angle (rad)",
                                  &Config::sim, &W::kick_cone_half_angle));
  k.push_back(make_key<W, double>("world.kick_speed_max", "ball speed at full kick (m/s)",
                                  &Config::sim, &W::kick_speed_max));
  k.push_back(make_key<W, double>("world.kick_cooldown", "seconds between kicks", &Config::sim,
                                  &W::kick_cooldown));
  k.push_back(make_key<W, double>("world.rolling_decel_min", "ball rolling decel range low",
                                  &Config::sim, &W::rolling_decel_min));
  k.push_back(make_key<W, double>("world.rolling_decel_max", "ball rolling decel range high",
                                  &Config::sim, &W::rolling_decel_max));
  k.push_back(make_key<W, double>("world.ball_mass_min", "ball mass range low (kg)", &Config::sim,
                                  &W::ball_mass_min));
  k.push_back(make_key<W, double>("world.ball_mass_max", "ball mass range high (kg)",
                                  &Config::sim, &W::ball_mass_max));
  k.push_back(make_key<W, double>("world.push_interval", "ball perturbation period (s)",
                                  &Config::sim, &W::push_interval));
  k.push_back(make_key<W, double>("world.ball_push_speed_bound",
                                  "per-axis perturbation bound (m/s)", &Config::sim,
                                  &W::ball_push_speed_bound));
  k.push_back(make_key<W, double>("world.fov_half_angle", "camera half field of view (rad)",
                                  &Config::sim, &W::fov_half_angle));
  k.push_back(make_key<W, double>("world.fov_max_range", "camera max range (m)", &Config::sim,
                                  &W::fov_max_range));
  k.push_back(make_key<W, double>("world.chase_timeout", "chase episode length (s)", &Config::sim,
                                  &W::chase_timeout));
  k.push_back(make_key<W, double>("world.kick_timeout", "kick episode length (s)", &Config::sim,
                                  &W::kick_timeout));
  k.push_back(make_key<bool>("world.chase_kick_enabled", "allow kicks in the chase stage",
                             &Config::chase_kick_enabled));

  // rewards (both stage presets)
  auto add_weights = [&k](const std::string& prefix, R Config::* sub) {
    k.push_back(make_key<R, double>(prefix + ".survival", "survival weight", sub, &R::survival));
    k.push_back(
        make_key<R, double>(prefix + ".track_lin", "linear tracking weight", sub, &R::track_lin));
    k.push_back(
        make_key<R, double>(prefix + ".track_ang", "yaw tracking weight", sub, &R::track_ang));
    k.push_back(
        make_key<R, double>(prefix + ".head_track", "ball-in-view weight", sub, &R::head_track));
    k.push_back(make_key<R, double>(prefix + ".ball_velocity", "ball velocity weight", sub,
                                    &R::ball_velocity));
    k.push_back(make_key<R, double>(prefix + ".action_rate", "action rate weight (<= 0)", sub,
                                    &R::action_rate));
    k.push_back(make_key<R, double>(prefix + ".yaw_effort", "yaw rate weight (<= 0)", sub,
                                    &R::yaw_effort));
    k.push_back(make_key<R, double>(prefix + ".accel_effort", "base accel weight (<= 0)", sub,
                                    &R::accel_effort));
    k.push_back(make_key<R, double>(prefix + ".kick_effort", "kick impulse weight (<= 0)", sub,
                                    &R::kick_effort));
    k.push_back(make_key<R, double>(prefix + ".sigma_lin", "linear kernel bandwidth", sub,
                                    &R::sigma_lin));
    k.push_back(
        make_key<R, double>(prefix + ".sigma_ang", "yaw kernel bandwidth", sub, &R::sigma_ang));
  };
  add_weights("rewards.chase", &Config::chase_weights);
  add_weights("rewards.kick", &Config::kick_weights);

  // perception
  k.push_back(make_key<N, double>("noise.c_vel", "apparent-speed noise divisor (m/s)",
                                  &Config::noise, &N::c_vel));
  k.push_back(make_key<N, double>("noise.c_min", "noise floor (m)", &Config::noise, &N::c_min));
  k.push_back(make_key<double>("percept.ball_period", "ball publish period (s)",
                               &Config::ball_period));

  // commands
  k.push_back(make_key<double>("cmd.speed_min", "episode speed command low (m/s)",
                               &Config::cmd_speed_min));
  k.push_back(make_key<double>("cmd.speed_max", "episode speed command high (m/s)",
                               &Config::cmd_speed_max));
  k.push_back(make_key<double>("cmd.omega_min", "episode turn command low (rad/s)",
                               &Config::cmd_omega_min));
  k.push_back(make_key<double>("cmd.omega_max", "episode turn command high (rad/s)",
                               &Config::cmd_omega_max));

  // training shape
  k.push_back(make_key<int>("train.num_envs", "parallel environments", &Config::num_envs));
  k.push_back(make_key<int>("train.rollout_len", "steps per env per iteration",
                            &Config::rollout_len));
  k.push_back(make_key<int>("runtime.workers", "worker threads (0 = hardware)",
                            &Config::workers));
  k.push_back(make_key<double>("train.fixed_reg_coef",
                               "fixed regularization coefficient (stages 1-2)",
                               &Config::fixed_reg_coef));
  k.push_back(make_key<uint64_t>("train.stage1_steps", "stage 1 env steps",
                                 &Config::stage1_steps));
  k.push_back(make_key<uint64_t>("train.stage2_steps", "stage 2 env steps",
                                 &Config::stage2_steps));
  k.push_back(make_key<uint64_t>("train.stage4_steps", "stage 4 env steps",
                                 &Config::stage4_steps));
  k.push_back(make_key<bool>("train.stage2_reset_value", "reset critics at stage 2 start",
                             &Config::stage2_reset_value));
  k.push_back(make_key<int>("train.stage4_value_warmup_iters",
                            "iterations with the policy loss off at stage 4 start",
                            &Config::stage4_value_warmup_iters));
  k.push_back(make_key<double>("train.stage4_lr_scale", "stage 4 learning-rate factor",
                               &Config::stage4_lr_scale));
  k.push_back(make_key<double>("train.stage4_init_log_std",
                               "action log-std at stage 4 start", &Config::stage4_init_log_std));
  k.push_back(make_key<double>("train.stage4_entropy_coef", "stage 4 entropy bonus",
                               &Config::stage4_entropy_coef));
  k.push_back(make_key<double>("train.stage4_push_bound_factor",
                               "stage 4 perturbation bound scale",
                               &Config::stage4_push_bound_factor));
  k.push_back(make_key<double>("train.stage4_push_interval_factor",
                               "stage 4 perturbation interval scale",
                               &Config::stage4_push_interval_factor));
  k.push_back(make_key<int>("train.h_estimate_steps", "steps for the cost-threshold estimate",
                            &Config::h_estimate_steps));

  // ppo
  k.push_back(make_key<P, double>("ppo.clip", "surrogate clip", &Config::ppo, &P::clip));
  k.push_back(make_key<P, int>("ppo.epochs", "update epochs", &Config::ppo, &P::epochs));
  k.push_back(make_key<P, int>("ppo.minibatch", "minibatch size", &Config::ppo, &P::minibatch));
  k.push_back(make_key<P, double>("ppo.lr", "learning rate", &Config::ppo, &P::lr));
  k.push_back(make_key<P, double>("ppo.gamma", "discount", &Config::ppo, &P::gamma));
  k.push_back(make_key<P, double>("ppo.lambda", "GAE lambda", &Config::ppo, &P::lam));
  k.push_back(make_key<P, double>("ppo.entropy_coef", "entropy bonus", &Config::ppo,
                                  &P::entropy_coef));
  k.push_back(make_key<P, double>("ppo.value_coef", "value loss weight", &Config::ppo,
                                  &P::value_coef));
  k.push_back(make_key<P, double>("ppo.max_grad_norm", "global gradient clip", &Config::ppo,
                                  &P::max_grad_norm));
  k.push_back(make_key<P, double>("ppo.kl_stop", "epoch early-stop KL", &Config::ppo,
                                  &P::kl_stop));
  k.push_back(make_key<P, double>("ppo.reward_scale", "return/value conditioning scale",
                                  &Config::ppo, &P::reward_scale));
  k.push_back(make_key<P, int>("ppo.grad_chunk", "fixed gradient chunk size", &Config::ppo,
                               &P::grad_chunk));

  // dagger
  k.push_back(make_key<D, int>("dagger.rounds_states", "states collected per round",
                               &Config::dagger, &D::states_per_round));
  k.push_back(make_key<D, int>("dagger.n_envs", "rollout environments", &Config::dagger,
                               &D::n_envs));
  k.push_back(make_key<D, int>("dagger.epochs", "fit epochs per round", &Config::dagger,
                               &D::epochs));
  k.push_back(make_key<D, int>("dagger.minibatch", "fit minibatch", &Config::dagger,
                               &D::minibatch));
  k.push_back(make_key<D, double>("dagger.lr", "fit learning rate", &Config::dagger, &D::lr));
  k.push_back(make_key<D, double>("dagger.heldout_fraction", "held-out split fraction",
                                  &Config::dagger, &D::heldout_fraction));
  k.push_back(make_key<D, double>("dagger.beta", "teacher-action mixing probability",
                                  &Config::dagger, &D::beta));
  k.push_back(make_key<D, bool>("dagger.stochastic_rollout", "sample student actions",
                                &Config::dagger, &D::stochastic_rollout));
  k.push_back(make_key<int>("dagger.rounds", "number of aggregation rounds",
                            &Config::dagger_rounds));

  // np3o
  k.push_back(make_key<double>("np3o.kappa", "exact-penalty coefficient", &Config::np3o_kappa));
  {
    // JSON has no NaN; null stands for "take h from the stage-1 lineage".
    KeyDef def;
    def.key = "np3o.h_override";
    def.doc = "constraint threshold override (null = from stage 1)";
    def.get = [](const Config& c) {
      return std::isfinite(c.np3o_h_override) ? nlohmann::json(c.np3o_h_override)
                                              : nlohmann::json(nullptr);
    };
    def.set = [](Config& c, const nlohmann::json& v) {
      if (v.is_null()) {
        c.np3o_h_override = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      if (!v.is_number()) throw ConfigError("config: bad value type for key 'np3o.h_override'");
      c.np3o_h_override = v.get<double>();
    };
    k.push_back(std::move(def));
  }

  // eval
  k.push_back(make_key<int>("eval.trials", "trials per grid cell", &Config::eval_trials));
  k.push_back(make_key<int>("eval.horizon_steps", "max steps per trial",
                            &Config::eval_horizon_steps));
  k.push_back(make_key<bool>("eval.stop_on_success", "end a trial at the first goal",
                             &Config::eval_stop_on_success));
  k.push_back(make_key<int>("eval.chase_episodes", "episodes for the chase metric",
                            &Config::chase_eval_episodes));
  k.push_back(make_key<double>("eval.chase_dist", "near-ball distance threshold (m)",
                               &Config::chase_eval_dist));
  return k;
}

}  // namespace

const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> s = build_schema();
  return s;
}

Config default_config() { return Config{}; }

namespace {

void flatten(const nlohmann::json& node, const std::string& prefix,
             std::vector<std::pair<std::string, nlohmann::json>>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else {
    out.emplace_back(prefix, node);
  }
}

const KeyDef* find_key(const std::string& key) {
  for (const auto& def : schema()) {
    if (def.key == key) return &def;
  }
  return nullptr;
}

[[noreturn]] void unknown_key(const std::string& key) {
  std::ostringstream os;
  os << "config: unknown key '" << key << "'. Valid keys:";
  for (const auto& def : schema()) os << "\n  " << def.key;
  throw ConfigError(os.str());
}

}  // namespace

Config load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  Config cfg;
  std::vector<std::pair<std::string, nlohmann::json>> leaves;
  flatten(j, "", leaves);
  for (const auto& [key, value] : leaves) {
    const KeyDef* def = find_key(key);
    if (!def) unknown_key(key);
    def->set(cfg, value);
  }
  return cfg;
}

void apply_overrides(Config& cfg, const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: override must be key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    const KeyDef* def = find_key(key);
    if (!def) unknown_key(key);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
      value = raw;  // bare strings
    }
    def->set(cfg, value);
  }
}

std::string config_doc() {
  const Config defaults;
  std::ostringstream os;
  for (const auto& def : schema()) {
    os << def.key << " = " << def.get(defaults).dump() << "  # " << def.doc << "\n";
  }
  return os.str();
}

nlohmann::json to_json(const Config& cfg) {
  nlohmann::json j;
  for (const auto& def : schema()) {
    nlohmann::json* node = &j;
    std::string key = def.key;
    size_t pos;
    while ((pos = key.find('.')) != std::string::npos) {
      node = &(*node)[key.substr(0, pos)];
      key = key.substr(pos + 1);
    }
    (*node)[key] = def.get(cfg);
  }
  return j;
}

}  // namespace striker::config
