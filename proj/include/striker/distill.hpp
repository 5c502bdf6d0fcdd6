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

#include <vector>

#include "striker/adam.hpp"
#include "striker/envside.hpp"
#include "striker/net.hpp"

namespace striker::algos {

struct DaggerConfig {
  int states_per_round = 50000;
  int n_envs = 16;
  int epochs = 3;
  int minibatch = 1024;
  double lr = 1e-3;
  double heldout_fraction = 0.1;
  double beta = 0.0;  // probability of acting with the teacher during rollout
  bool stochastic_rollout = true;
  size_t dataset_cap = 600000;  // reservoir-downsampled train-sample budget
  double max_grad_norm = 1.0;
  int grad_chunk = 128;
  int workers = 0;
};

// Aggregated demonstration data. Episodes are stored once as contiguous frame
// streams; samples reference (episode, t) and history windows are materialized
// on demand with zero padding before the episode start. The train/held-out
// split is a deterministic per-sample hash; the train list is capped by
// seeded reservoir downsampling.
class DaggerDataset {
 public:
  struct Episode {
    std::vector<float> frames;  // len * kObsDim, frame-major
    std::vector<float> labels;  // len * kActionDim
    int len = 0;
  };

  struct SampleRef {
    int episode = 0;
    int t = 0;
  };

  explicit DaggerDataset(uint64_t seed, size_t cap, double heldout_fraction);

  void add_episode(Episode ep);
  size_t train_size() const { return train_.size(); }
  size_t heldout_size() const { return heldout_.size(); }
  size_t states_seen() const { return states_seen_; }
  const std::vector<SampleRef>& train_samples() const { return train_; }
  const std::vector<SampleRef>& heldout_samples() const { return heldout_; }
  const Episode& episode(int i) const { return episodes_[i]; }

  // Writes the history window ending at sample `ref` (oldest frame first,
  // zeros before the episode start) plus the newest frame.
  void materialize(const SampleRef& ref, float* hist_dst, float* obs_dst) const;
  const float* label(const SampleRef& ref) const;

 private:
  std::vector<Episode> episodes_;
  std::vector<SampleRef> train_;
  std::vector<SampleRef> heldout_;
  uint64_t seed_;
  size_t cap_;
  double heldout_fraction_;
  size_t states_seen_ = 0;
  size_t train_seen_ = 0;
  Rng reservoir_rng_;
};

struct DaggerRoundResult {
  double heldout_mse = 0.0;
  double final_train_mse = 0.0;
  double teacher_action_fraction = 0.0;  // rollout provenance: beta mixing
  int states_collected = 0;
  size_t dataset_train_size = 0;
};

// One imitation round: roll out the student under modeled perception, label
// every visited state with the teacher's deterministic action on the matching
// privileged frame, aggregate, then re-fit the student action mean by MSE
// regression over the full aggregate.
DaggerRoundResult dagger_round(net::ParamBundle<float>& student,
                               const net::ParamBundle<float>& teacher,
                               const pipeline::EnvSettings& env_settings, int round_index,
                               DaggerDataset& dataset, AdamState<float>& adam,
                               const DaggerConfig& cfg, uint64_t seed);

// Label MSE of the student on a sample list (no parameter updates).
double dagger_eval_mse(const net::ParamBundle<float>& student, const DaggerDataset& dataset,
                       const std::vector<DaggerDataset::SampleRef>& samples, int grad_chunk,
                       int workers);

}  // namespace striker::algos
