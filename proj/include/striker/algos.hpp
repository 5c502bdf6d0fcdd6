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

#include <limits>
#include <span>
#include <vector>

#include "striker/adam.hpp"
#include "striker/net.hpp"
#include "striker/threading.hpp"

namespace striker::algos {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one env's step sequence. `dones` marks
// terminal steps (value bootstraps to zero across them); `bootstrap_value`
// estimates the state after the final step when the sequence is truncated.
inline GaeResult gae(std::span<const double> rewards, std::span<const double> values,
                     std::span<const uint8_t> dones, double bootstrap_value, double gamma,
                     double lambda) {
  const size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("gae: sequence length mismatch");
  }
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double last = 0.0;
  for (size_t k = n; k-- > 0;) {
    const double nonterminal = dones[k] ? 0.0 : 1.0;
    const double next_value = (k + 1 < n) ? values[k + 1] : bootstrap_value;
    const double delta = rewards[k] + gamma * next_value * nonterminal - values[k];
    last = delta + gamma * lambda * nonterminal * last;
    out.advantages[k] = last;
    out.returns[k] = last + values[k];
  }
  return out;
}

// Rollout storage across E envs x L steps, indexed env-major: i = e * L + t.
template <typename T>
struct TrajectoryBatch {
  net::ArchKind arch = net::ArchKind::kTeacher;
  int n_envs = 0;
  int horizon = 0;
  int obs_dim = 0;
  int hist_dim = 0;  // history * obs_dim for the student, 0 otherwise
  int action_dim = 0;

  net::Matrix<T> obs;      // obs_dim x N
  net::Matrix<T> hist;     // hist_dim x N (student only)
  net::Matrix<T> actions;  // action_dim x N
  std::vector<double> logp;
  std::vector<double> reward;  // stream driving the task advantages
  std::vector<double> r_task;  // raw aggregated task reward
  std::vector<double> c_regu;  // raw aggregated regularization cost (>= 0)
  std::vector<T> value_r;
  std::vector<T> value_c;
  std::vector<uint8_t> done;
  std::vector<uint8_t> valid;  // 0 drops the sample from the update
  std::vector<double> bootstrap_r;  // per env
  std::vector<double> bootstrap_c;

  int size() const { return n_envs * horizon; }
  int index(int env, int t) const { return env * horizon + t; }

  void resize(net::ArchKind kind, int envs, int steps, int obs, int hist_rows, int act) {
    arch = kind;
    n_envs = envs;
    horizon = steps;
    obs_dim = obs;
    hist_dim = hist_rows;
    action_dim = act;
    const int n = size();
    this->obs.resize(obs, n);
    if (hist_rows > 0) this->hist.resize(hist_rows, n);
    actions.resize(act, n);
    logp.assign(n, 0.0);
    reward.assign(n, 0.0);
    r_task.assign(n, 0.0);
    c_regu.assign(n, 0.0);
    value_r.assign(n, T(0));
    value_c.assign(n, T(0));
    done.assign(n, 0);
    valid.assign(n, 1);
    bootstrap_r.assign(envs, 0.0);
    bootstrap_c.assign(envs, 0.0);
  }
};

enum class Optimizer { kAdam, kSgd };

struct PpoConfig {
  double clip = 0.2;
  int epochs = 4;
  int minibatch = 2048;
  double lr = 3e-4;
  double gamma = 0.99;
  double lam = 0.95;
  double entropy_coef = 0.003;
  double value_coef = 0.5;
  double max_grad_norm = 1.0;
  double kl_stop = 0.03;       // epoch-level early stop on the KL estimate
  double reward_scale = 0.05;  // conditioning of returns/values
  bool normalize_advantages = true;
  double policy_coef = 1.0;  // 0 during critic warmup
  int grad_chunk = 128;      // fixed work decomposition; independent of workers
  int workers = 0;           // 0 -> hardware concurrency
  Optimizer optimizer = Optimizer::kAdam;
};

// Expected per-step cost limit h and the exact-penalty coefficient kappa.
struct ConstraintSpec {
  double h = 0.0;
  double kappa = 2.0;

  void validate() const {
    if (!(h >= 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("ConstraintSpec: h must be finite and >= 0");
    }
    if (!(kappa > 0.0)) throw std::invalid_argument("ConstraintSpec: kappa must be > 0");
  }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss_r = 0.0;
  double value_loss_c = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double mean_cost = 0.0;
  double violation_fraction = 0.0;  // fraction of valid steps with c_regu > h
  double penalty = 0.0;             // mean active-penalty magnitude
  double grad_norm = 0.0;
  double mean_reward = 0.0;
  int minibatches = 0;
  int epochs_run = 0;
  bool skipped_nonfinite = false;
};

namespace detail {

template <typename T>
struct ChunkSlot {
  net::Matrix<T> obs, hist, actions;
  net::TeacherTrace<T> ttrace;
  net::StudentTrace<T> strace;
  net::Matrix<T> value_r, value_c;
  net::ParamBundle<T> grads;
  std::vector<int> samples;  // batch indices handled by this chunk
  // Per-sample scalars from the forward pass.
  std::vector<double> logp_new, ratio;
  std::vector<uint8_t> pg_branch, cs_branch;
  // Partial sums.
  double pg_sum = 0.0, cs_sum = 0.0, kl_sum = 0.0, vr_sum = 0.0, vc_sum = 0.0;
  int clip_count = 0;
};

// Computes per-sample policy scalars for one chunk (forward pass).
template <typename T>
void chunk_forward(const TrajectoryBatch<T>& batch, const net::ParamBundle<T>& params,
                   const PpoConfig& cfg, const std::vector<double>& adv,
                   const std::vector<double>& adv_c, ChunkSlot<T>& slot) {
  const int n = static_cast<int>(slot.samples.size());
  const int act = batch.action_dim;
  slot.obs.resize(batch.obs_dim, n);
  slot.actions.resize(act, n);
  if (batch.arch == net::ArchKind::kStudent) slot.hist.resize(batch.hist_dim, n);
  for (int j = 0; j < n; ++j) {
    const int i = slot.samples[j];
    slot.obs.col(j) = batch.obs.col(i);
    slot.actions.col(j) = batch.actions.col(i);
    if (batch.arch == net::ArchKind::kStudent) slot.hist.col(j) = batch.hist.col(i);
  }

  const net::Matrix<T>* mean = nullptr;
  if (batch.arch == net::ArchKind::kTeacher) {
    net::forward_teacher<T>(params, slot.obs, nullptr, &slot.value_r, &slot.value_c,
                            &slot.ttrace, true);
    mean = &slot.ttrace.mean;
  } else {
    net::forward_student<T>(params, slot.hist, slot.obs, nullptr, &slot.value_r, &slot.value_c,
                            &slot.strace, true);
    mean = &slot.strace.mean;
  }

  slot.logp_new.assign(n, 0.0);
  slot.ratio.assign(n, 0.0);
  slot.pg_branch.assign(n, 0);
  slot.cs_branch.assign(n, 0);
  slot.pg_sum = slot.cs_sum = slot.kl_sum = slot.vr_sum = slot.vc_sum = 0.0;
  slot.clip_count = 0;

  const auto& log_std = params.log_std();
  for (int j = 0; j < n; ++j) {
    const int i = slot.samples[j];
    double logp = 0.0;
    for (int d = 0; d < act; ++d) {
      const double ls =
          std::clamp(static_cast<double>(log_std(d, 0)), net::kLogStdMin, net::kLogStdMax);
      const double sigma = std::exp(ls);
      const double z =
          (static_cast<double>(slot.actions(d, j)) - static_cast<double>((*mean)(d, j))) / sigma;
      logp += -0.5 * z * z - ls - net::kLogSqrt2Pi;
    }
    slot.logp_new[j] = logp;
    const double logratio = logp - batch.logp[i];
    const double ratio = std::exp(logratio);
    slot.ratio[j] = ratio;
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);

    const double a = adv[i];
    const double pg1 = -ratio * a;
    const double pg2 = -clipped * a;
    slot.pg_branch[j] = pg1 >= pg2 ? 1 : 0;
    slot.pg_sum += std::max(pg1, pg2);

    const double ac = adv_c[i];
    const double cs1 = ratio * ac;
    const double cs2 = clipped * ac;
    slot.cs_branch[j] = cs1 >= cs2 ? 1 : 0;
    slot.cs_sum += std::max(cs1, cs2);

    slot.kl_sum += ratio - 1.0 - logratio;
    if (std::abs(ratio - 1.0) > cfg.clip) ++slot.clip_count;
  }
}

// Computes gradients for one chunk (backward pass). `kappa_eff` is the active
// exact-penalty coefficient (0 when the constraint gate is closed).
template <typename T>
void chunk_backward(const TrajectoryBatch<T>& batch, const net::ParamBundle<T>& params,
                    const PpoConfig& cfg, const std::vector<double>& adv,
                    const std::vector<double>& adv_c, const std::vector<double>& ret_r,
                    const std::vector<double>& ret_c, double kappa_eff, int minibatch_size,
                    ChunkSlot<T>& slot) {
  const int n = static_cast<int>(slot.samples.size());
  const int act = batch.action_dim;
  const double inv_b = 1.0 / static_cast<double>(minibatch_size);
  const net::Matrix<T>& mean =
      batch.arch == net::ArchKind::kTeacher ? slot.ttrace.mean : slot.strace.mean;
  const auto& log_std = params.log_std();

  net::Matrix<T> d_mean = net::Matrix<T>::Zero(act, n);
  net::Matrix<T> d_vr = net::Matrix<T>::Zero(1, n);
  net::Matrix<T> d_vc = net::Matrix<T>::Zero(1, n);
  slot.grads.set_zero();
  auto& g_logstd = slot.grads.log_std();

  for (int j = 0; j < n; ++j) {
    const int i = slot.samples[j];
    const double ratio = slot.ratio[j];
    double coef = 0.0;
    if (slot.pg_branch[j]) coef += cfg.policy_coef * (-adv[i] * ratio);
    if (kappa_eff != 0.0 && slot.cs_branch[j]) coef += kappa_eff * adv_c[i] * ratio;
    coef *= inv_b;

    for (int d = 0; d < act; ++d) {
      const double ls =
          std::clamp(static_cast<double>(log_std(d, 0)), net::kLogStdMin, net::kLogStdMax);
      const double sigma = std::exp(ls);
      const double z =
          (static_cast<double>(slot.actions(d, j)) - static_cast<double>(mean(d, j))) / sigma;
      d_mean(d, j) = static_cast<T>(coef * z / sigma);
      g_logstd(d, 0) += static_cast<T>(coef * (z * z - 1.0));
    }

    const double vr_err = static_cast<double>(slot.value_r(0, j)) - ret_r[i];
    const double vc_err = static_cast<double>(slot.value_c(0, j)) - ret_c[i];
    slot.vr_sum += vr_err * vr_err;
    slot.vc_sum += vc_err * vc_err;
    d_vr(0, j) = static_cast<T>(2.0 * cfg.value_coef * vr_err * inv_b);
    d_vc(0, j) = static_cast<T>(2.0 * cfg.value_coef * vc_err * inv_b);
  }

  if (batch.arch == net::ArchKind::kTeacher) {
    net::backward_teacher<T>(params, slot.ttrace, d_mean, &d_vr, &d_vc, slot.grads);
  } else {
    net::backward_student<T>(params, slot.strace, d_mean, &d_vr, &d_vc, slot.grads);
  }
}

}  // namespace detail

// Shared clipped-surrogate update. With `constraint == nullptr` this is PPO:
// clipped policy surrogate on the task advantages, regression of both value
// heads, entropy bonus. With a constraint it is the penalized form: the update
// adds kappa * ReLU(L_clip(cost advantages) + mean_cost - h) evaluated per
// minibatch, which reduces exactly to PPO whenever the gate stays closed.
template <typename T>
UpdateStats clipped_update(const TrajectoryBatch<T>& batch, net::ParamBundle<T>& params,
                           AdamState<T>& adam, const PpoConfig& cfg,
                           const algos::ConstraintSpec* constraint, uint64_t seed) {
  const int n = batch.size();
  if (n == 0) throw std::invalid_argument("update: empty batch");
  if (constraint) constraint->validate();

  UpdateStats stats;

  // Advantage estimation per env on the scaled reward/cost streams. Value
  // predictions and bootstraps are already in scaled units.
  std::vector<double> adv(n, 0.0), ret_r(n, 0.0), adv_c(n, 0.0), ret_c(n, 0.0);
  {
    std::vector<double> rew(batch.horizon), val(batch.horizon), cost(batch.horizon),
        valc(batch.horizon);
    std::vector<uint8_t> dn(batch.horizon);
    for (int e = 0; e < batch.n_envs; ++e) {
      for (int t = 0; t < batch.horizon; ++t) {
        const int i = batch.index(e, t);
        rew[t] = batch.reward[i] * cfg.reward_scale;
        val[t] = static_cast<double>(batch.value_r[i]);
        cost[t] = batch.c_regu[i] * cfg.reward_scale;
        valc[t] = static_cast<double>(batch.value_c[i]);
        dn[t] = batch.done[i];
      }
      const GaeResult gr = gae(rew, val, dn, batch.bootstrap_r[e], cfg.gamma, cfg.lam);
      const GaeResult gc = gae(cost, valc, dn, batch.bootstrap_c[e], cfg.gamma, cfg.lam);
      for (int t = 0; t < batch.horizon; ++t) {
        const int i = batch.index(e, t);
        adv[i] = gr.advantages[t];
        ret_r[i] = gr.returns[t];
        adv_c[i] = gc.advantages[t];
        ret_c[i] = gc.returns[t];
      }
    }
  }

  std::vector<int> idx;
  idx.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (batch.valid[i]) idx.push_back(i);
  }
  if (idx.empty()) throw std::invalid_argument("update: no valid samples");

  if (cfg.normalize_advantages) {
    double mean = 0.0;
    for (int i : idx) mean += adv[i];
    mean /= static_cast<double>(idx.size());
    double var = 0.0;
    for (int i : idx) var += (adv[i] - mean) * (adv[i] - mean);
    var /= static_cast<double>(idx.size());
    const double inv = 1.0 / (std::sqrt(var) + 1e-8);
    for (int i : idx) adv[i] = (adv[i] - mean) * inv;
  }

  double mean_cost = 0.0, mean_reward = 0.0;
  int violations = 0;
  const double h = constraint ? constraint->h : std::numeric_limits<double>::infinity();
  for (int i : idx) {
    mean_cost += batch.c_regu[i];
    mean_reward += batch.reward[i];
    if (batch.c_regu[i] > h) ++violations;
  }
  mean_cost /= static_cast<double>(idx.size());
  mean_reward /= static_cast<double>(idx.size());
  stats.mean_cost = mean_cost;
  stats.mean_reward = mean_reward;
  stats.violation_fraction = static_cast<double>(violations) / static_cast<double>(idx.size());
  // Slack of the expected per-step constraint, in scaled units to match the
  // cost surrogate.
  const double cost_slack = (mean_cost - (constraint ? constraint->h : 0.0)) * cfg.reward_scale;

  const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
  const int chunk_size = std::max(1, cfg.grad_chunk);
  const int max_chunks = (std::min<int>(cfg.minibatch, static_cast<int>(idx.size())) +
                          chunk_size - 1) / chunk_size;
  std::vector<detail::ChunkSlot<T>> slots(max_chunks);
  for (auto& s : slots) {
    s.grads = params;  // copies shapes; zeroed before each use
    s.grads.set_zero();
  }
  net::ParamBundle<T> grads = params;

  Rng shuffle_rng(derive_seed(seed, 0x7570646174ULL));
  double entropy = 0.0;
  {
    const auto& log_std = params.log_std();
    for (int d = 0; d < batch.action_dim; ++d) {
      entropy += std::clamp(static_cast<double>(log_std(d, 0)), net::kLogStdMin,
                            net::kLogStdMax) +
                 0.5 * std::log(kTwoPi) + 0.5;
    }
  }
  stats.entropy = entropy;

  double kl_accum = 0.0;
  int kl_batches = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the update stream; identical regardless of workers.
    for (size_t k = idx.size(); k > 1; --k) {
      const uint32_t j = shuffle_rng.bounded(static_cast<uint32_t>(k));
      std::swap(idx[k - 1], idx[j]);
    }

    double epoch_kl = 0.0;
    int epoch_mb = 0;
    for (size_t start = 0; start < idx.size(); start += cfg.minibatch) {
      const int b = static_cast<int>(std::min<size_t>(cfg.minibatch, idx.size() - start));
      const int n_chunks = (b + chunk_size - 1) / chunk_size;
      for (int c = 0; c < n_chunks; ++c) {
        const int lo = c * chunk_size;
        const int hi = std::min(b, lo + chunk_size);
        slots[c].samples.assign(idx.begin() + start + lo, idx.begin() + start + hi);
      }

      parallel_chunks(n_chunks, workers, [&](int c) {
        detail::chunk_forward(batch, params, cfg, adv, adv_c, slots[c]);
      });

      double pg_sum = 0.0, cs_sum = 0.0, kl_sum = 0.0;
      int clip_count = 0;
      for (int c = 0; c < n_chunks; ++c) {
        pg_sum += slots[c].pg_sum;
        cs_sum += slots[c].cs_sum;
        kl_sum += slots[c].kl_sum;
        clip_count += slots[c].clip_count;
      }
      const double inv_b = 1.0 / static_cast<double>(b);

      double kappa_eff = 0.0;
      if (constraint) {
        const double gate = cs_sum * inv_b + cost_slack;
        if (gate > 0.0) {
          kappa_eff = constraint->kappa * cfg.policy_coef;
          stats.penalty += constraint->kappa * gate;
        }
      }

      parallel_chunks(n_chunks, workers, [&](int c) {
        detail::chunk_backward(batch, params, cfg, adv, adv_c, ret_r, ret_c, kappa_eff, b,
                               slots[c]);
      });

      grads.set_zero();
      double vr_sum = 0.0, vc_sum = 0.0;
      for (int c = 0; c < n_chunks; ++c) {
        accumulate_grads(grads, slots[c].grads);
        vr_sum += slots[c].vr_sum;
        vc_sum += slots[c].vc_sum;
      }
      if (cfg.entropy_coef != 0.0) {
        grads.log_std().array() -= T(cfg.entropy_coef * cfg.policy_coef);
      }

      const double gnorm = global_grad_norm(grads);
      if (!std::isfinite(gnorm) || !std::isfinite(pg_sum)) {
        stats.skipped_nonfinite = true;
        stats.epochs_run = epoch;
        return stats;
      }
      if (cfg.max_grad_norm > 0.0 && gnorm > cfg.max_grad_norm) {
        scale_grads(grads, cfg.max_grad_norm / gnorm);
      }
      if (cfg.optimizer == Optimizer::kAdam) {
        if (!adam.initialized_for(params)) adam.init(params);
        adam.step(params, grads, cfg.lr);
      } else {
        sgd_step(params, grads, cfg.lr);
      }
      // Projection onto the log-std box.
      params.log_std() = params.log_std()
                             .array()
                             .max(T(net::kLogStdMin))
                             .min(T(net::kLogStdMax))
                             .matrix();

      stats.policy_loss += pg_sum * inv_b;
      stats.value_loss_r += vr_sum * inv_b;
      stats.value_loss_c += vc_sum * inv_b;
      stats.clip_fraction += static_cast<double>(clip_count) * inv_b;
      stats.grad_norm += gnorm;
      epoch_kl += kl_sum * inv_b;
      ++epoch_mb;
      ++stats.minibatches;
    }

    kl_accum += epoch_kl / std::max(1, epoch_mb);
    ++kl_batches;
    stats.epochs_run = epoch + 1;
    if (epoch_kl / std::max(1, epoch_mb) > cfg.kl_stop) break;
  }

  if (stats.minibatches > 0) {
    stats.policy_loss /= stats.minibatches;
    stats.value_loss_r /= stats.minibatches;
    stats.value_loss_c /= stats.minibatches;
    stats.clip_fraction /= stats.minibatches;
    stats.grad_norm /= stats.minibatches;
    stats.penalty /= stats.minibatches;
  }
  stats.kl = kl_batches > 0 ? kl_accum / kl_batches : 0.0;
  return stats;
}

template <typename T>
UpdateStats ppo_update(const TrajectoryBatch<T>& batch, net::ParamBundle<T>& params,
                       AdamState<T>& adam, const PpoConfig& cfg, uint64_t seed) {
  return clipped_update(batch, params, adam, cfg, nullptr, seed);
}

template <typename T>
UpdateStats np3o_update(const TrajectoryBatch<T>& batch, net::ParamBundle<T>& params,
                        AdamState<T>& adam, const PpoConfig& cfg, const ConstraintSpec& spec,
                        uint64_t seed) {
  return clipped_update(batch, params, adam, cfg, &spec, seed);
}

// 1.5x the mean of a per-step cost sample; the arithmetic behind the
// constraint threshold.
inline double threshold_from_costs(std::span<const double> costs) {
  if (costs.empty()) throw std::invalid_argument("threshold_from_costs: empty sample");
  double sum = 0.0;
  for (double c : costs) sum += c;
  return 1.5 * sum / static_cast<double>(costs.size());
}

}  // namespace striker::algos
