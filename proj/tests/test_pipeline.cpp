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

#include "striker/pipeline.hpp"

using namespace striker;
using namespace striker::pipeline;

namespace {

std::filesystem::path test_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "striker_pipeline_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Checkpoint sample_checkpoint() {
  Checkpoint ckpt;
  ckpt.stage = 2;
  ckpt.lineage = {1, 2};
  ckpt.cumulative_steps = 1234567;
  ckpt.master_seed = 99;
  ckpt.stream_nonce = 7;
  ckpt.h_reference = 0.125;
  ckpt.params = net::make_teacher<float>(net::TeacherDesc::make_default());
  Rng rng(1);
  net::init_params(ckpt.params, rng);
  ckpt.adam.init(ckpt.params);
  ckpt.adam.t = 42;
  ckpt.adam.m[0].setConstant(0.5f);
  return ckpt;
}

// Small-budget config for smoke runs.
config::Config smoke_config() {
  config::Config cfg;
  cfg.num_envs = 4;
  cfg.rollout_len = 64;
  cfg.stage1_steps = 512;
  cfg.stage2_steps = 512;
  cfg.stage4_steps = 512;
  cfg.ppo.minibatch = 128;
  cfg.ppo.epochs = 2;
  cfg.dagger.states_per_round = 400;
  cfg.dagger.n_envs = 4;
  cfg.dagger.epochs = 1;
  cfg.dagger_rounds = 1;
  cfg.h_estimate_steps = 1000;
  cfg.workers = 2;
  cfg.stage4_value_warmup_iters = 1;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoint: save/load round-trips bit-exactly") {
  const auto dir = test_dir();
  const std::string path = (dir / "roundtrip.ckpt").string();
  const Checkpoint ckpt = sample_checkpoint();
  save_checkpoint(path, ckpt);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.stage == ckpt.stage);
  CHECK(back.lineage == ckpt.lineage);
  CHECK(back.cumulative_steps == ckpt.cumulative_steps);
  CHECK(back.master_seed == ckpt.master_seed);
  CHECK(back.h_reference == ckpt.h_reference);
  CHECK(back.adam.t == ckpt.adam.t);
  REQUIRE(back.params.tensors.size() == ckpt.params.tensors.size());
  for (size_t i = 0; i < ckpt.params.tensors.size(); ++i) {
    CHECK(std::memcmp(back.params.tensors[i].value.data(),
                      ckpt.params.tensors[i].value.data(),
                      sizeof(float) * ckpt.params.tensors[i].value.size()) == 0);
    CHECK(std::memcmp(back.adam.m[i].data(), ckpt.adam.m[i].data(),
                      sizeof(float) * ckpt.adam.m[i].size()) == 0);
    CHECK(std::memcmp(back.adam.v[i].data(), ckpt.adam.v[i].data(),
                      sizeof(float) * ckpt.adam.v[i].size()) == 0);
  }
}

TEST_CASE("checkpoint: corruption, truncation and version errors are distinct") {
  const auto dir = test_dir();
  const std::string path = (dir / "corrupt.ckpt").string();
  save_checkpoint(path, sample_checkpoint());
  std::string bytes = read_bytes(path);

  // Flip a payload byte -> checksum error.
  {
    std::string bad = bytes;
    bad[bad.size() / 2] ^= 0x01;
    const std::string bad_path = (dir / "bad.ckpt").string();
    std::ofstream(bad_path, std::ios::binary) << bad;
    try {
      load_checkpoint(bad_path);
      FAIL("expected checksum error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointError::Kind::kChecksum);
    }
  }
  // Truncate -> truncation (or checksum) reported, never a partial load.
  {
    const std::string trunc_path = (dir / "trunc.ckpt").string();
    std::ofstream(trunc_path, std::ios::binary) << bytes.substr(0, bytes.size() / 3);
    CHECK_THROWS_AS(load_checkpoint(trunc_path), CheckpointError);
  }
  // Future version -> version error, with the checksum recomputed to match.
  {
    std::string future = bytes;
    uint32_t version = 999;
    std::memcpy(future.data() + 8, &version, sizeof(version));
    const std::string body = future.substr(8, future.size() - 12);
    const uint32_t crc = crc32(body.data(), body.size());
    std::memcpy(future.data() + future.size() - 4, &crc, sizeof(crc));
    const std::string future_path = (dir / "future.ckpt").string();
    std::ofstream(future_path, std::ios::binary) << future;
    try {
      load_checkpoint(future_path);
      FAIL("expected version error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointError::Kind::kVersion);
    }
  }
  // Wrong magic.
  {
    std::string bad = bytes;
    bad[0] = 'X';
    const std::string bad_path = (dir / "magic.ckpt").string();
    std::ofstream(bad_path, std::ios::binary) << bad;
    try {
      load_checkpoint(bad_path);
      FAIL("expected magic error");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointError::Kind::kMagic);
    }
  }
}

TEST_CASE("run_stage: stage 1 smoke writes a checkpoint and a stats log") {
  const auto dir = test_dir();
  StageRunConfig run;
  run.stage = 1;
  run.cfg = smoke_config();
  run.seed = 5;
  run.out_checkpoint = (dir / "s1.ckpt").string();
  run.stats_path = (dir / "s1_stats.jsonl").string();
  run.quiet = true;
  const Checkpoint ckpt = run_stage(run);
  CHECK(ckpt.stage == 1);
  CHECK(ckpt.lineage == std::vector<int>{1});
  CHECK(ckpt.cumulative_steps >= 512);
  CHECK(std::isfinite(ckpt.h_reference));
  CHECK(std::filesystem::exists(run.out_checkpoint));
  CHECK(std::filesystem::file_size(run.stats_path) > 0);
}

TEST_CASE("run_stage: missing prerequisite is a PrerequisiteError") {
  StageRunConfig run;
  run.stage = 3;
  run.cfg = smoke_config();
  run.quiet = true;
  CHECK_THROWS_AS(run_stage(run), PrerequisiteError);

  run.in_checkpoint = "/nonexistent/none.ckpt";
  CHECK_THROWS_AS(run_stage(run), PrerequisiteError);
}

TEST_CASE("run_stage: wrong-stage checkpoint is rejected") {
  const auto dir = test_dir();
  const std::string path = (dir / "stage2like.ckpt").string();
  save_checkpoint(path, sample_checkpoint());  // stage 2
  StageRunConfig run;
  run.stage = 2;  // wants stage 1
  run.cfg = smoke_config();
  run.in_checkpoint = path;
  run.quiet = true;
  CHECK_THROWS_AS(run_stage(run), PrerequisiteError);
}

TEST_CASE("run_stage: identical config and seed give bit-identical checkpoints") {
  const auto dir = test_dir();
  StageRunConfig run;
  run.stage = 1;
  run.cfg = smoke_config();
  run.seed = 11;
  run.quiet = true;
  run.out_checkpoint = (dir / "det_a.ckpt").string();
  run_stage(run);
  run.out_checkpoint = (dir / "det_b.ckpt").string();
  // Different worker count must not change the artifact either.
  run.cfg.workers = 1;
  run_stage(run);
  CHECK(read_bytes((dir / "det_a.ckpt").string()) == read_bytes((dir / "det_b.ckpt").string()));
}

TEST_CASE("run_stage: full smoke chain 1 -> 2 -> 3 -> 4 with lineage") {
  const auto dir = test_dir();
  const config::Config cfg = smoke_config();
  std::string prev;
  for (int stage = 1; stage <= 4; ++stage) {
    StageRunConfig run;
    run.stage = stage;
    run.cfg = cfg;
    run.seed = 21;
    run.quiet = true;
    run.in_checkpoint = prev;
    run.out_checkpoint = (dir / ("chain" + std::to_string(stage) + ".ckpt")).string();
    const Checkpoint ckpt = run_stage(run);
    CHECK(ckpt.stage == stage);
    prev = run.out_checkpoint;
  }
  const Checkpoint last = load_checkpoint(prev);
  CHECK(last.lineage == std::vector<int>{1, 2, 3, 4});
  CHECK(last.params.kind == net::ArchKind::kStudent);
  CHECK(std::isfinite(last.h_reference));
}
