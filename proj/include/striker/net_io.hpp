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

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "striker/net.hpp"

// Parameter-bundle serialization. Layout: 8 magic bytes, a u32 format version,
// the JSON architecture descriptor (u64 length + bytes), then every tensor's
// payload as little-endian 32-bit floats, column-major within a tensor, in
// declaration order. Shapes are implied by the descriptor.

namespace striker::net {

inline constexpr char kBundleMagic[8] = {'S', 'T', 'R', 'K', 'N', 'P', '0', '1'};
inline constexpr uint32_t kBundleVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "parameter serialization assumes a little-endian host");

inline nlohmann::json descriptor_json(const ParamBundle<float>& b) {
  nlohmann::json j;
  if (b.kind == ArchKind::kTeacher) {
    const TeacherDesc& d = b.teacher;
    j["kind"] = "teacher";
    j["obs_dim"] = d.obs_dim;
    j["action_dim"] = d.action_dim;
    j["hidden"] = d.hidden;
    j["input_scale"] = d.input_scale;
  } else {
    const StudentDesc& d = b.student;
    j["kind"] = "student";
    j["obs_dim"] = d.obs_dim;
    j["history"] = d.history;
    j["conv1"] = {d.conv1_channels, d.conv1_kernel, d.conv1_stride};
    j["conv2"] = {d.conv2_channels, d.conv2_kernel, d.conv2_stride};
    j["latent_dim"] = d.latent_dim;
    j["hidden"] = d.hidden;
    j["action_dim"] = d.action_dim;
    j["input_scale"] = d.input_scale;
  }
  return j;
}

inline ParamBundle<float> bundle_from_descriptor(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "teacher") {
    TeacherDesc d;
    d.obs_dim = j.at("obs_dim").get<int>();
    d.action_dim = j.at("action_dim").get<int>();
    d.hidden = j.at("hidden").get<std::array<int, 3>>();
    d.input_scale = j.at("input_scale").get<std::vector<double>>();
    return make_teacher<float>(d);
  }
  if (kind == "student") {
    StudentDesc d;
    d.obs_dim = j.at("obs_dim").get<int>();
    d.history = j.at("history").get<int>();
    const auto c1 = j.at("conv1").get<std::array<int, 3>>();
    const auto c2 = j.at("conv2").get<std::array<int, 3>>();
    d.conv1_channels = c1[0];
    d.conv1_kernel = c1[1];
    d.conv1_stride = c1[2];
    d.conv2_channels = c2[0];
    d.conv2_kernel = c2[1];
    d.conv2_stride = c2[2];
    d.latent_dim = j.at("latent_dim").get<int>();
    d.hidden = j.at("hidden").get<std::array<int, 3>>();
    d.action_dim = j.at("action_dim").get<int>();
    d.input_scale = j.at("input_scale").get<std::vector<double>>();
    return make_student<float>(d);
  }
  throw std::runtime_error("parameter bundle: unknown architecture kind: " + kind);
}

inline void save_bundle(std::ostream& os, const ParamBundle<float>& b) {
  os.write(kBundleMagic, sizeof(kBundleMagic));
  const uint32_t version = kBundleVersion;
  os.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::string desc = descriptor_json(b).dump();
  const uint64_t len = desc.size();
  os.write(reinterpret_cast<const char*>(&len), sizeof(len));
  os.write(desc.data(), static_cast<std::streamsize>(desc.size()));
  for (const auto& t : b.tensors) {
    os.write(reinterpret_cast<const char*>(t.value.data()),
             static_cast<std::streamsize>(sizeof(float) * t.value.size()));
  }
}

inline ParamBundle<float> load_bundle(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kBundleMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("parameter bundle: bad magic");
  }
  uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!is || version != kBundleVersion) {
    throw std::runtime_error("parameter bundle: unsupported format version");
  }
  uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!is || len > (1u << 20)) throw std::runtime_error("parameter bundle: bad descriptor");
  std::string desc(len, '\0');
  is.read(desc.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("parameter bundle: truncated descriptor");
  ParamBundle<float> b = bundle_from_descriptor(nlohmann::json::parse(desc));
  for (auto& t : b.tensors) {
    is.read(reinterpret_cast<char*>(t.value.data()),
            static_cast<std::streamsize>(sizeof(float) * t.value.size()));
    if (!is) throw std::runtime_error("parameter bundle: truncated tensor " + t.name);
  }
  return b;
}

}  // namespace striker::net
