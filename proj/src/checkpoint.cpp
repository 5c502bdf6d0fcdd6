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

#include "striker/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "striker/net_io.hpp"

namespace striker::pipeline {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'K', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

uint32_t crc_table_entry(uint32_t i) {
  uint32_t c = i;
  for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
  return c;
}

template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size()) {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: truncated file");
  }
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void put_floats(std::string& buf, const float* data, size_t n) {
  buf.append(reinterpret_cast<const char*>(data), n * sizeof(float));
}

void take_floats(const std::string& buf, size_t& pos, float* data, size_t n) {
  if (pos + n * sizeof(float) > buf.size()) {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: truncated tensors");
  }
  std::memcpy(data, buf.data() + pos, n * sizeof(float));
  pos += n * sizeof(float);
}

}  // namespace

uint32_t crc32(const void* data, size_t len, uint32_t seed) {
  static uint32_t table[256];
  static bool init = [] {
    for (uint32_t i = 0; i < 256; ++i) table[i] = crc_table_entry(i);
    return true;
  }();
  (void)init;
  uint32_t c = seed ^ 0xffffffffu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string body;
  put(body, kVersion);
  put(body, static_cast<int32_t>(ckpt.stage));
  put(body, static_cast<uint32_t>(ckpt.lineage.size()));
  for (int s : ckpt.lineage) put(body, static_cast<int32_t>(s));
  put(body, ckpt.cumulative_steps);
  put(body, ckpt.master_seed);
  put(body, ckpt.stream_nonce);
  put(body, ckpt.h_reference);

  {
    std::ostringstream os(std::ios::binary);
    net::save_bundle(os, ckpt.params);
    const std::string blob = os.str();
    put(body, static_cast<uint64_t>(blob.size()));
    body.append(blob);
  }

  put(body, static_cast<int64_t>(ckpt.adam.t));
  put(body, static_cast<uint32_t>(ckpt.adam.m.size()));
  for (size_t i = 0; i < ckpt.adam.m.size(); ++i) {
    put_floats(body, ckpt.adam.m[i].data(), static_cast<size_t>(ckpt.adam.m[i].size()));
    put_floats(body, ckpt.adam.v[i].data(), static_cast<size_t>(ckpt.adam.v[i].size()));
  }

  const uint32_t crc = crc32(body.data(), body.size());

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: cannot write " + tmp);
    out.write(kMagic, sizeof(kMagic));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
    if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: short write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string raw = ss.str();
  if (raw.size() < sizeof(kMagic) + sizeof(uint32_t)) {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: file too small");
  }
  if (std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(CheckpointError::Kind::kMagic, "checkpoint: bad magic");
  }
  const std::string body = raw.substr(sizeof(kMagic), raw.size() - sizeof(kMagic) - 4);
  uint32_t stored_crc;
  std::memcpy(&stored_crc, raw.data() + raw.size() - 4, 4);
  if (crc32(body.data(), body.size()) != stored_crc) {
    throw CheckpointError(CheckpointError::Kind::kChecksum, "checkpoint: checksum mismatch");
  }

  size_t pos = 0;
  Checkpoint ckpt;
  const uint32_t version = take<uint32_t>(body, pos);
  if (version != kVersion) {
    throw CheckpointError(CheckpointError::Kind::kVersion,
                          "checkpoint: unsupported format version " + std::to_string(version));
  }
  ckpt.stage = take<int32_t>(body, pos);
  const uint32_t lineage_n = take<uint32_t>(body, pos);
  if (lineage_n > 64) {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: bad lineage length");
  }
  for (uint32_t i = 0; i < lineage_n; ++i) ckpt.lineage.push_back(take<int32_t>(body, pos));
  ckpt.cumulative_steps = take<uint64_t>(body, pos);
  ckpt.master_seed = take<uint64_t>(body, pos);
  ckpt.stream_nonce = take<uint64_t>(body, pos);
  ckpt.h_reference = take<double>(body, pos);

  const uint64_t blob_len = take<uint64_t>(body, pos);
  if (pos + blob_len > body.size()) {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: truncated parameters");
  }
  {
    std::istringstream is(body.substr(pos, blob_len), std::ios::binary);
    try {
      ckpt.params = net::load_bundle(is);
    } catch (const std::runtime_error& e) {
      throw CheckpointError(CheckpointError::Kind::kTruncated, e.what());
    }
    pos += blob_len;
  }

  ckpt.adam.t = take<int64_t>(body, pos);
  const uint32_t n_moments = take<uint32_t>(body, pos);
  if (n_moments != 0 && n_moments != ckpt.params.tensors.size()) {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "checkpoint: bad moment count");
  }
  for (uint32_t i = 0; i < n_moments; ++i) {
    const auto& shape = ckpt.params.tensors[i].value;
    net::Matrix<float> m(shape.rows(), shape.cols()), v(shape.rows(), shape.cols());
    take_floats(body, pos, m.data(), static_cast<size_t>(m.size()));
    take_floats(body, pos, v.data(), static_cast<size_t>(v.size()));
    ckpt.adam.m.push_back(std::move(m));
    ckpt.adam.v.push_back(std::move(v));
  }
  return ckpt;
}

}  // namespace striker::pipeline
