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

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "striker/adam.hpp"
#include "striker/net.hpp"

namespace striker::pipeline {

struct CheckpointError : std::runtime_error {
  enum class Kind { kIo, kMagic, kVersion, kTruncated, kChecksum };
  Kind kind;
  CheckpointError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

// Stage artifact: parameters, optimizer moments, seed-stream state, lineage.
// Binary layout: magic, u32 version, header fields, parameter bundle, Adam
// moments, and a trailing CRC32 over everything after the magic.
struct Checkpoint {
  int stage = 0;
  std::vector<int> lineage;       // stage ids along the training chain
  uint64_t cumulative_steps = 0;  // env steps across the lineage
  uint64_t master_seed = 0;
  uint64_t stream_nonce = 0;  // next unused seed-stream index
  double h_reference = std::numeric_limits<double>::quiet_NaN();  // cost threshold
  net::ParamBundle<float> params;
  AdamState<float> adam;
};

uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

// Atomic: serializes to memory, writes a temp file, then renames.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace striker::pipeline
