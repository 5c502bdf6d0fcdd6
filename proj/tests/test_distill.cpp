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

#include "striker/distill.hpp"

using namespace striker;
using namespace striker::algos;

namespace {

pipeline::EnvSettings kick_settings(bool perception) {
  pipeline::EnvSettings s = pipeline::EnvSettings::for_stage(world::Stage::kKick);
  s.perception_enabled = perception;
  return s;
}

DaggerConfig small_dagger() {
  DaggerConfig cfg;
  cfg.states_per_round = 1500;
  cfg.n_envs = 4;
  cfg.epochs = 2;
  cfg.minibatch = 256;
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("dagger dataset: window materialization zero-pads before episode start") {
  DaggerDataset ds(1, 1000, 0.0);
  DaggerDataset::Episode ep;
  ep.len = 3;
  ep.frames.resize(3 * perception::kObsDim, 0.0f);
  ep.labels.resize(3 * perception::kActionDim, 0.0f);
  for (int t = 0; t < 3; ++t) ep.frames[t * perception::kObsDim] = static_cast<float>(t + 1);
  ds.add_episode(std::move(ep));
  REQUIRE(ds.train_size() == 3);

  std::vector<float> hist(perception::kHistory * perception::kObsDim, -1.0f);
  std::vector<float> obs(perception::kObsDim, -1.0f);
  ds.materialize({0, 1}, hist.data(), obs.data());
  // History: 48 zero frames, then frames t=0 and t=1.
  CHECK(hist[0] == 0.0f);
  CHECK(hist[47 * perception::kObsDim] == 0.0f);
  CHECK(hist[48 * perception::kObsDim] == 1.0f);
  CHECK(hist[49 * perception::kObsDim] == 2.0f);
  CHECK(obs[0] == 2.0f);
}

TEST_CASE("dagger dataset: held-out split fraction and reservoir cap") {
  DaggerDataset ds(7, 500, 0.1);
  for (int e = 0; e < 10; ++e) {
    DaggerDataset::Episode ep;
    ep.len = 100;
    ep.frames.resize(100 * perception::kObsDim, 0.0f);
    ep.labels.resize(100 * perception::kActionDim, 0.0f);
    ds.add_episode(std::move(ep));
  }
  CHECK(ds.states_seen() == 1000);
  const double frac = static_cast<double>(ds.heldout_size()) / 1000.0;
  CHECK(frac > 0.05);
  CHECK(frac < 0.15);
  CHECK(ds.train_size() == 500);  // capped by the reservoir
}

TEST_CASE("dagger: zero teacher and zero student form a fixed point") {
  const net::ParamBundle<float> teacher =
      net::make_teacher<float>(net::TeacherDesc::make_default());
  net::ParamBundle<float> student = net::make_student<float>(net::StudentDesc::make_default());
  AdamState<float> adam;
  DaggerDataset ds(3, 100000, 0.1);
  const DaggerConfig cfg = small_dagger();
  for (int round = 0; round < 2; ++round) {
    const auto res =
        dagger_round(student, teacher, kick_settings(false), round, ds, adam, cfg, 5);
    CHECK(res.heldout_mse == doctest::Approx(0.0).epsilon(1e-12));
  }
  for (const auto& t : student.tensors) CHECK(t.value.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("dagger: round 0 uses pure-student rollouts at beta = 0") {
  net::ParamBundle<float> teacher = net::make_teacher<float>(net::TeacherDesc::make_default());
  net::ParamBundle<float> student = net::make_student<float>(net::StudentDesc::make_default());
  Rng rng(8);
  net::init_params(teacher, rng);
  net::init_params(student, rng);
  AdamState<float> adam;
  DaggerDataset ds(9, 100000, 0.1);
  DaggerConfig cfg = small_dagger();
  cfg.states_per_round = 600;
  cfg.beta = 0.0;
  const auto res = dagger_round(student, teacher, kick_settings(true), 0, ds, adam, cfg, 6);
  CHECK(res.teacher_action_fraction == 0.0);
  CHECK(res.states_collected >= cfg.states_per_round);

  cfg.beta = 1.0;  // provenance logging reports full teacher control
  DaggerDataset ds2(10, 100000, 0.1);
  const auto res2 = dagger_round(student, teacher, kick_settings(true), 0, ds2, adam, cfg, 7);
  CHECK(res2.teacher_action_fraction == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dagger: imitation loss shrinks against a fixed random teacher") {
  net::ParamBundle<float> teacher = net::make_teacher<float>(net::TeacherDesc::make_default());
  net::ParamBundle<float> student = net::make_student<float>(net::StudentDesc::make_default());
  Rng trng(11), srng(12);
  net::init_params(teacher, trng);
  net::init_params(student, srng);
  AdamState<float> adam;
  DaggerDataset ds(13, 100000, 0.1);
  DaggerConfig cfg = small_dagger();
  cfg.epochs = 4;

  std::vector<double> heldout;
  for (int round = 0; round < 3; ++round) {
    const auto res =
        dagger_round(student, teacher, kick_settings(false), round, ds, adam, cfg, 15);
    heldout.push_back(res.heldout_mse);
  }
  CHECK(heldout.back() < heldout.front());
}

TEST_CASE("estimate_constraint_threshold: identically-zero-cost policy gives h = 0") {
  const net::ParamBundle<float> zero_policy =
      net::make_teacher<float>(net::TeacherDesc::make_default());
  const double h = estimate_constraint_threshold(zero_policy, kick_settings(false), 2000, 2, 1);
  CHECK(h == 0.0);
}

TEST_CASE("estimate_constraint_threshold: rejects short estimates") {
  const net::ParamBundle<float> policy =
      net::make_teacher<float>(net::TeacherDesc::make_default());
  CHECK_THROWS_AS(estimate_constraint_threshold(policy, kick_settings(false), 999, 2, 1),
                  std::invalid_argument);
}

TEST_CASE("estimate_constraint_threshold: disjoint estimates agree within 5%") {
  // A steady pursuing policy: constant drive and turn biases through the tanh
  // output layer (zero weights elsewhere).
  net::ParamBundle<float> policy = net::make_teacher<float>(net::TeacherDesc::make_default());
  auto& bias = policy.at(net::TIx::kAB3);
  bias(0, 0) = 0.7f;   // forward drive
  bias(2, 0) = 0.4f;   // steady turn
  bias(3, 0) = -2.0f;  // never trigger a kick
  const auto settings = kick_settings(false);
  const double h1 = estimate_constraint_threshold(policy, settings, 20000, 2, 100);
  const double h2 = estimate_constraint_threshold(policy, settings, 20000, 2, 200);
  REQUIRE(h1 > 0.0);
  CHECK(std::abs(h1 - h2) / h1 < 0.05);
}
