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

#include <string>

#include "striker/checkpoint.hpp"
#include "striker/config.hpp"

namespace striker::pipeline {

struct PrerequisiteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stage-4 ablation arms: the constrained update, or plain PPO with a fixed
// regularization coefficient folded into the reward.
struct AdaptAlgo {
  bool constrained = true;
  double fixed_coef = 1.0;  // used when !constrained
};

struct StageRunConfig {
  int stage = 1;  // 1 chase, 2 kick, 3 distill, 4 adapt
  config::Config cfg;
  uint64_t seed = 0;
  std::string in_checkpoint;   // required for stages 2-4
  std::string out_checkpoint;  // written atomically
  std::string stats_path;      // line-delimited JSON, one record per iteration
  AdaptAlgo adapt;             // stage 4 only
  bool quiet = false;
};

// Runs one training stage end to end and writes the checkpoint + stats log.
// Throws PrerequisiteError when the input checkpoint is missing or from the
// wrong stage, NumericalError when parameters blow up mid-run (the last good
// checkpoint stays on disk).
Checkpoint run_stage(const StageRunConfig& run);

}  // namespace striker::pipeline
