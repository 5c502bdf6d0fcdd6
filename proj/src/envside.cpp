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

#include "striker/envside.hpp"

#include <atomic>

#include "striker/threading.hpp"

namespace striker::pipeline {

namespace {

// Episode-start placeholder: no previous action yet, all channels zero.
world::Action zero_action() {
  world::Action a;
  a.kick_trigger = 0.0;
  return a;
}

}  // namespace

EnvInstance::EnvInstance(const EnvSettings& settings, uint64_t seed)
    : settings_(settings),
      hist_(perception::kHistory),
      env_rng_(derive_seed(seed, 0x656e76ULL)),
      noise_rng_(derive_seed(seed, 0x6e6f697365ULL)) {
  settings_.sim.validate();
  settings_.weights.validate();
  settings_.noise.validate();
  clock_.ball_period = settings_.ball_period;
  clock_.proprio_period = settings_.sim.dt;
  reset_episode();
}

void EnvInstance::reset_episode() {
  cmd_.vx = env_rng_.uniform(settings_.cmd_speed_min, settings_.cmd_speed_max);
  cmd_.vy = 0.0;
  cmd_.omega = env_rng_.uniform(settings_.cmd_omega_min, settings_.cmd_omega_max);
  state_ = world::reset(settings_.stage, settings_.sim, env_rng_);
  clock_.reset(noise_rng_);
  hist_.clear();
  prev_action_ = zero_action();
  ep_return_ = 0.0;
  ep_steps_ = 0;
  assemble_obs();
}

void EnvInstance::reset_episode_at(const Vec2& ball_pos) {
  cmd_.vx = env_rng_.uniform(settings_.cmd_speed_min, settings_.cmd_speed_max);
  cmd_.vy = 0.0;
  cmd_.omega = env_rng_.uniform(settings_.cmd_omega_min, settings_.cmd_omega_max);
  state_ = world::reset_kick_at(ball_pos, settings_.sim, env_rng_);
  clock_.reset(noise_rng_);
  hist_.clear();
  prev_action_ = zero_action();
  ep_return_ = 0.0;
  ep_steps_ = 0;
  assemble_obs();
}

void EnvInstance::assemble_obs() {
  if (settings_.perception_enabled) {
    obs_ = perception::tick_and_assemble(state_, clock_, settings_.noise, ball_in_fov(), cmd_,
                                         prev_action_, noise_rng_);
  } else {
    obs_ = perception::assemble_clean_obs(state_, cmd_, prev_action_);
  }
  hist_.push(obs_);
}

perception::PrivilegedFrame EnvInstance::teacher_frame() const {
  return perception::assemble_teacher_obs(state_, cmd_, prev_action_);
}

EnvInstance::StepOutcome EnvInstance::step(const world::Action& action) {
  StepOutcome out;
  const Vec2 prev_body_vel = state_.robot.body_velocity;
  world::StepResult r = world::step(state_, action, settings_.sim, env_rng_);
  const bool fov_after = world::in_fov(r.state, settings_.sim);
  out.reward = rewards::compose_reward(settings_.stage, r.state, r.events, action, prev_action_,
                                       prev_body_vel, cmd_, settings_.weights, fov_after,
                                       settings_.sim.dt);
  out.events = r.events;
  state_ = r.state;
  prev_action_ = action.clamped();
  ep_return_ += out.reward.r_task;
  ep_steps_ += 1;
  if (!out.events.terminated) assemble_obs();
  return out;
}

namespace {

void copy_priv(const perception::PrivilegedFrame& f, float* dst) {
  for (int d = 0; d < perception::kPrivDim; ++d) dst[d] = f.v[d];
}

world::Action action_from_vec(const net::Vector<float>& a) {
  world::Action act;
  act.vx = a[0];
  act.vy = a[1];
  act.omega = a[2];
  act.kick_trigger = a[3];
  act.kick_dir = a[4];
  return act;
}

world::Action random_action(Rng& rng) {
  world::Action act;
  act.vx = rng.uniform(-1.0, 1.0);
  act.vy = rng.uniform(-1.0, 1.0);
  act.omega = rng.uniform(-1.0, 1.0);
  act.kick_trigger = rng.uniform(-1.0, 1.0);
  act.kick_dir = rng.uniform(-1.0, 1.0);
  return act;
}

}  // namespace

RolloutInfo collect_rollout(std::vector<EnvInstance>& envs, std::vector<Rng>& action_rngs,
                            const net::ParamBundle<float>& params, const RolloutConfig& cfg,
                            algos::TrajectoryBatch<float>& batch) {
  const bool student = params.kind == net::ArchKind::kStudent;
  const int obs_dim = student ? params.student.obs_dim : params.teacher.obs_dim;
  const int hist_dim = student ? params.student.obs_dim * params.student.history : 0;
  const int act_dim = params.action_dim();
  batch.resize(params.kind, cfg.n_envs, cfg.horizon, obs_dim, hist_dim, act_dim);

  struct EnvResult {
    double ep_return_sum = 0.0;
    double ep_cost_sum = 0.0;
    int episodes = 0;
    int kicks = 0;
    int ball_resets = 0;
  };
  std::vector<EnvResult> results(cfg.n_envs);

  parallel_chunks(cfg.n_envs, cfg.workers, [&](int e) {
    EnvInstance& env = envs[e];
    Rng& arng = action_rngs[e];
    EnvResult& res = results[e];
    net::Matrix<float> obs(obs_dim, 1), hist(std::max(1, hist_dim), 1);
    net::Matrix<float> mean, vr, vc;
    double ep_cost = 0.0;
    int ep_start = 0;

    auto fill_inputs = [&] {
      if (student) {
        env.history().copy_to(hist.data());
        for (int d = 0; d < obs_dim; ++d) obs(d, 0) = env.student_frame().v[d];
      } else {
        const perception::PrivilegedFrame f = env.teacher_frame();
        copy_priv(f, obs.data());
      }
    };

    for (int t = 0; t < cfg.horizon; ++t) {
      const int i = batch.index(e, t);
      fill_inputs();
      if (student) {
        net::forward_student<float>(params, hist, obs, &mean, &vr, &vc, nullptr, true);
        batch.hist.col(i) = hist.col(0);
      } else {
        net::forward_teacher<float>(params, obs, &mean, &vr, &vc, nullptr, true);
      }
      batch.obs.col(i) = obs.col(0);
      batch.value_r[i] = vr(0, 0);
      batch.value_c[i] = vc(0, 0);

      net::Vector<float> act(act_dim);
      double logp = 0.0;
      if (cfg.stochastic) {
        const auto sample = net::sample_and_logprob<float>(mean.col(0), params.log_std().col(0),
                                                           arng);
        act = sample.action;
        logp = sample.logp;
      } else {
        act = mean.col(0);
        logp = net::log_prob<float>(mean.col(0), params.log_std().col(0), act);
      }
      batch.actions.col(i) = act;
      batch.logp[i] = logp;

      const auto outcome = env.step(action_from_vec(act));
      batch.r_task[i] = outcome.reward.r_task;
      batch.c_regu[i] = outcome.reward.c_regu;
      batch.reward[i] = outcome.reward.r_task - cfg.fixed_reg_coef * outcome.reward.c_regu;
      batch.done[i] = outcome.events.terminated ? 1 : 0;
      ep_cost += outcome.reward.c_regu;
      if (outcome.events.kicked) ++res.kicks;
      if (outcome.events.ball_reset) ++res.ball_resets;

      if (outcome.events.terminated) {
        if (outcome.events.reason == world::Termination::kFallProxy) {
          for (int k = ep_start; k <= t; ++k) batch.valid[batch.index(e, k)] = 0;
        } else {
          res.ep_return_sum += env.episode_return();
          res.ep_cost_sum += ep_cost / std::max(1, env.episode_steps());
          res.episodes += 1;
        }
        env.reset_episode();
        ep_cost = 0.0;
        ep_start = t + 1;
      }
    }

    // Bootstrap from the state after the last step.
    fill_inputs();
    if (student) {
      net::forward_student<float>(params, hist, obs, &mean, &vr, &vc, nullptr, true);
    } else {
      net::forward_teacher<float>(params, obs, &mean, &vr, &vc, nullptr, true);
    }
    batch.bootstrap_r[e] = static_cast<double>(vr(0, 0));
    batch.bootstrap_c[e] = static_cast<double>(vc(0, 0));
  });

  RolloutInfo info;
  double ret = 0.0, cost = 0.0;
  for (const auto& r : results) {
    ret += r.ep_return_sum;
    cost += r.ep_cost_sum;
    info.episodes_finished += r.episodes;
    info.kicks += r.kicks;
    info.ball_resets += r.ball_resets;
  }
  if (info.episodes_finished > 0) {
    info.mean_episode_return = ret / info.episodes_finished;
    info.mean_episode_cost = cost / info.episodes_finished;
  }
  return info;
}

double chase_near_ball_rate(const net::ParamBundle<float>* params, const EnvSettings& settings,
                            int episodes, double dist_threshold, int workers, uint64_t seed) {
  std::atomic<int> near{0};
  parallel_chunks(episodes, workers, [&](int ep) {
    EnvInstance env(settings, derive_seed(seed, 0x6368617365ULL, ep));
    Rng arng(derive_seed(seed, 0x616374ULL, ep));
    net::Matrix<float> obs(perception::kPrivDim, 1), mean;
    for (;;) {
      world::Action act;
      if (params) {
        const perception::PrivilegedFrame f = env.teacher_frame();
        copy_priv(f, obs.data());
        net::forward_teacher<float>(*params, obs, &mean, nullptr, nullptr, nullptr, false);
        act = action_from_vec(mean.col(0));
      } else {
        act = random_action(arng);
      }
      const auto outcome = env.step(act);
      if (outcome.events.terminated) break;
    }
    const double dist = norm(env.state().ball.position - env.state().robot.position);
    if (dist < dist_threshold) near.fetch_add(1);
  });
  return static_cast<double>(near.load()) / static_cast<double>(episodes);
}

}  // namespace striker::pipeline

namespace striker::algos {

double estimate_constraint_threshold(const net::ParamBundle<float>& walk_policy,
                                     const pipeline::EnvSettings& chase_settings, int n_steps,
                                     int workers, uint64_t seed) {
  if (n_steps < 1000) {
    throw std::invalid_argument("estimate_constraint_threshold: need n_steps >= 1000");
  }
  pipeline::EnvSettings settings = chase_settings;
  settings.stage = world::Stage::kChase;
  settings.weights = rewards::RewardWeights::chase();
  settings.sim.kick_enabled = false;

  const int n_envs = 8;
  const int per_env = (n_steps + n_envs - 1) / n_envs;
  std::vector<double> env_cost(n_envs, 0.0);
  parallel_chunks(n_envs, workers, [&](int e) {
    pipeline::EnvInstance env(settings, derive_seed(seed, 0x68726566ULL, e));
    net::Matrix<float> obs(perception::kPrivDim, 1), mean;
    double sum = 0.0;
    for (int t = 0; t < per_env; ++t) {
      const perception::PrivilegedFrame f = env.teacher_frame();
      for (int d = 0; d < perception::kPrivDim; ++d) obs(d, 0) = f.v[d];
      net::forward_teacher<float>(walk_policy, obs, &mean, nullptr, nullptr, nullptr, false);
      world::Action act;
      act.vx = mean(0, 0);
      act.vy = mean(1, 0);
      act.omega = mean(2, 0);
      act.kick_trigger = mean(3, 0);
      act.kick_dir = mean(4, 0);
      const auto outcome = env.step(act);
      sum += outcome.reward.c_regu;
      if (outcome.events.terminated) env.reset_episode();
    }
    env_cost[e] = sum;
  });

  double total = 0.0;
  for (int e = 0; e < n_envs; ++e) total += env_cost[e];
  return 1.5 * total / static_cast<double>(n_envs * per_env);
}

}  // namespace striker::algos
