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

#include "striker/distill.hpp"

#include <cstring>

#include "striker/threading.hpp"

namespace striker::algos {

using perception::kActionDim;
using perception::kHistory;
using perception::kObsDim;

DaggerDataset::DaggerDataset(uint64_t seed, size_t cap, double heldout_fraction)
    : seed_(seed),
      cap_(cap),
      heldout_fraction_(heldout_fraction),
      reservoir_rng_(derive_seed(seed, 0x7265737672ULL)) {}

void DaggerDataset::add_episode(Episode ep) {
  const int e = static_cast<int>(episodes_.size());
  const int len = ep.len;
  episodes_.push_back(std::move(ep));
  const auto cut = static_cast<uint64_t>(heldout_fraction_ * 1000.0);
  for (int t = 0; t < len; ++t) {
    ++states_seen_;
    const bool heldout = derive_seed(seed_, 0x73706c6974ULL, e, t) % 1000 < cut;
    if (heldout) {
      heldout_.push_back({e, t});
      continue;
    }
    ++train_seen_;
    if (train_.size() < cap_) {
      train_.push_back({e, t});
    } else {
      const uint64_t j = reservoir_rng_.next_u64() % train_seen_;
      if (j < cap_) train_[static_cast<size_t>(j)] = {e, t};
    }
  }
}

void DaggerDataset::materialize(const SampleRef& ref, float* hist_dst, float* obs_dst) const {
  const Episode& ep = episodes_[ref.episode];
  const int t = ref.t;
  for (int i = 0; i < kHistory; ++i) {
    const int src = t - (kHistory - 1) + i;
    float* dst = hist_dst + static_cast<size_t>(i) * kObsDim;
    if (src < 0) {
      std::memset(dst, 0, sizeof(float) * kObsDim);
    } else {
      std::memcpy(dst, ep.frames.data() + static_cast<size_t>(src) * kObsDim,
                  sizeof(float) * kObsDim);
    }
  }
  std::memcpy(obs_dst, ep.frames.data() + static_cast<size_t>(t) * kObsDim,
              sizeof(float) * kObsDim);
}

const float* DaggerDataset::label(const SampleRef& ref) const {
  return episodes_[ref.episode].labels.data() + static_cast<size_t>(ref.t) * kActionDim;
}

namespace {

struct FitChunk {
  net::Matrix<float> hist, obs, labels;
  net::StudentTrace<float> trace;
  net::ParamBundle<float> grads;
  double sq_sum = 0.0;
  bool with_grads = false;
};

void fit_chunk(const net::ParamBundle<float>& student, const DaggerDataset& dataset,
               const std::vector<DaggerDataset::SampleRef>& refs, size_t lo, size_t hi,
               int minibatch_size, FitChunk& slot) {
  const int n = static_cast<int>(hi - lo);
  const int hist_dim = kHistory * kObsDim;
  slot.hist.resize(hist_dim, n);
  slot.obs.resize(kObsDim, n);
  slot.labels.resize(kActionDim, n);
  for (int j = 0; j < n; ++j) {
    const auto& ref = refs[lo + j];
    dataset.materialize(ref, slot.hist.col(j).data(), slot.obs.col(j).data());
    const float* y = dataset.label(ref);
    for (int d = 0; d < kActionDim; ++d) slot.labels(d, j) = y[d];
  }

  net::Matrix<float> mean;
  if (slot.with_grads) {
    net::forward_student<float>(student, slot.hist, slot.obs, &mean, nullptr, nullptr,
                                &slot.trace, false);
  } else {
    net::forward_student<float>(student, slot.hist, slot.obs, &mean, nullptr, nullptr, nullptr,
                                false);
  }

  const net::Matrix<float> err = mean - slot.labels;
  slot.sq_sum = static_cast<double>(err.cast<double>().squaredNorm());
  if (slot.with_grads) {
    slot.grads.set_zero();
    const net::Matrix<float> d_mean =
        err * static_cast<float>(2.0 / static_cast<double>(minibatch_size));
    net::backward_student<float>(student, slot.trace, d_mean, nullptr, nullptr, slot.grads);
  }
}

}  // namespace

double dagger_eval_mse(const net::ParamBundle<float>& student, const DaggerDataset& dataset,
                       const std::vector<DaggerDataset::SampleRef>& samples, int grad_chunk,
                       int workers) {
  if (samples.empty()) return 0.0;
  const int chunk = std::max(1, grad_chunk);
  const int n_chunks = static_cast<int>((samples.size() + chunk - 1) / chunk);
  std::vector<double> sums(n_chunks, 0.0);
  parallel_chunks(n_chunks, workers, [&](int c) {
    FitChunk slot;
    slot.with_grads = false;
    const size_t lo = static_cast<size_t>(c) * chunk;
    const size_t hi = std::min(samples.size(), lo + chunk);
    fit_chunk(student, dataset, samples, lo, hi, 1, slot);
    sums[c] = slot.sq_sum;
  });
  double total = 0.0;
  for (double s : sums) total += s;
  return total / static_cast<double>(samples.size());
}

DaggerRoundResult dagger_round(net::ParamBundle<float>& student,
                               const net::ParamBundle<float>& teacher,
                               const pipeline::EnvSettings& env_settings, int round_index,
                               DaggerDataset& dataset, AdamState<float>& adam,
                               const DaggerConfig& cfg, uint64_t seed) {
  DaggerRoundResult result;
  const uint64_t round_seed = derive_seed(seed, 0x646167ULL, round_index);

  // --- collect ---
  const int per_env = (cfg.states_per_round + cfg.n_envs - 1) / cfg.n_envs;
  std::vector<std::vector<DaggerDataset::Episode>> collected(cfg.n_envs);
  std::vector<int> teacher_actions(cfg.n_envs, 0);
  parallel_chunks(cfg.n_envs, cfg.workers, [&](int e) {
    pipeline::EnvInstance env(env_settings, derive_seed(round_seed, 0x656e76ULL, e));
    Rng arng(derive_seed(round_seed, 0x616374ULL, e));
    const int hist_dim = kHistory * kObsDim;
    net::Matrix<float> hist(hist_dim, 1), obs(kObsDim, 1), priv(perception::kPrivDim, 1);
    net::Matrix<float> mean, tmean;

    DaggerDataset::Episode ep;
    auto flush = [&] {
      if (ep.len > 0) collected[e].push_back(std::move(ep));
      ep = DaggerDataset::Episode{};
    };

    for (int t = 0; t < per_env; ++t) {
      env.history().copy_to(hist.data());
      for (int d = 0; d < kObsDim; ++d) obs(d, 0) = env.student_frame().v[d];
      const perception::PrivilegedFrame pf = env.teacher_frame();
      for (int d = 0; d < perception::kPrivDim; ++d) priv(d, 0) = pf.v[d];

      net::forward_student<float>(student, hist, obs, &mean, nullptr, nullptr, nullptr, false);
      net::forward_teacher<float>(teacher, priv, &tmean, nullptr, nullptr, nullptr, false);

      ep.frames.insert(ep.frames.end(), env.student_frame().v.begin(),
                       env.student_frame().v.end());
      for (int d = 0; d < kActionDim; ++d) ep.labels.push_back(tmean(d, 0));
      ep.len += 1;

      net::Vector<float> act(kActionDim);
      const bool use_teacher = cfg.beta > 0.0 && arng.uniform() < cfg.beta;
      if (use_teacher) {
        act = tmean.col(0);
        teacher_actions[e] += 1;
      } else if (cfg.stochastic_rollout) {
        act = net::sample_and_logprob<float>(mean.col(0), student.log_std().col(0), arng).action;
      } else {
        act = mean.col(0);
      }
      world::Action wact;
      wact.vx = act[0];
      wact.vy = act[1];
      wact.omega = act[2];
      wact.kick_trigger = act[3];
      wact.kick_dir = act[4];
      const auto outcome = env.step(wact);
      if (outcome.events.terminated) {
        flush();
        env.reset_episode();
      }
    }
    flush();
  });

  int states = 0, teacher_total = 0;
  for (int e = 0; e < cfg.n_envs; ++e) {
    for (auto& ep : collected[e]) {
      states += ep.len;
      dataset.add_episode(std::move(ep));
    }
    teacher_total += teacher_actions[e];
  }
  result.states_collected = states;
  result.teacher_action_fraction =
      states > 0 ? static_cast<double>(teacher_total) / states : 0.0;
  result.dataset_train_size = dataset.train_size();

  // --- fit ---
  std::vector<DaggerDataset::SampleRef> order(dataset.train_samples());
  Rng shuffle_rng(derive_seed(round_seed, 0x666974ULL));
  const int chunk = std::max(1, cfg.grad_chunk);
  const int max_chunks = (cfg.minibatch + chunk - 1) / chunk;
  std::vector<FitChunk> slots(max_chunks);
  for (auto& s : slots) {
    s.grads = student;
    s.grads.set_zero();
    s.with_grads = true;
  }
  net::ParamBundle<float> grads = student;

  double final_mse = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t k = order.size(); k > 1; --k) {
      const uint32_t j = shuffle_rng.bounded(static_cast<uint32_t>(k));
      std::swap(order[k - 1], order[j]);
    }
    double epoch_sq = 0.0;
    size_t epoch_n = 0;
    for (size_t start = 0; start < order.size(); start += cfg.minibatch) {
      const size_t b = std::min<size_t>(cfg.minibatch, order.size() - start);
      const int n_chunks = static_cast<int>((b + chunk - 1) / chunk);
      parallel_chunks(n_chunks, cfg.workers, [&](int c) {
        const size_t lo = start + static_cast<size_t>(c) * chunk;
        const size_t hi = std::min(start + b, lo + chunk);
        fit_chunk(student, dataset, order, lo, hi, static_cast<int>(b), slots[c]);
      });
      grads.set_zero();
      for (int c = 0; c < n_chunks; ++c) {
        accumulate_grads(grads, slots[c].grads);
        epoch_sq += slots[c].sq_sum;
      }
      epoch_n += b;
      const double gnorm = global_grad_norm(grads);
      if (!std::isfinite(gnorm)) continue;  // skip a blown minibatch
      if (cfg.max_grad_norm > 0.0 && gnorm > cfg.max_grad_norm) {
        scale_grads(grads, cfg.max_grad_norm / gnorm);
      }
      if (!adam.initialized_for(student)) adam.init(student);
      adam.step(student, grads, cfg.lr);
    }
    final_mse = epoch_n > 0 ? epoch_sq / static_cast<double>(epoch_n) : 0.0;
  }
  result.final_train_mse = final_mse;

  result.heldout_mse = dagger_eval_mse(student, dataset, dataset.heldout_samples(),
                                       cfg.grad_chunk, cfg.workers);
  return result;
}

}  // namespace striker::algos
