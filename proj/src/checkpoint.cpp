// Copyright 2026 The DMR Authors.
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

#include "dmr/model/checkpoint.hpp"

#include <bit>
#include <cstring>


namespace dmr {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'M', 'R', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void Append(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Read(const std::string& bytes, std::size_t& pos, const std::string& origin) {
  if (pos + sizeof(T) > bytes.size()) {
    throw Error(ErrorCategory::kModel, origin + ": truncated checkpoint");
  }
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

const NamedTensor* Checkpoint::Find(const std::string& name) const {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  json header;
  header["role"] = ckpt.role;
  header["config"] = ckpt.config.ToJson();
  header["vocab"] = ckpt.vocab;
  header["metadata"] = ckpt.metadata;
  json tensors = json::array();
  std::size_t offset = 0;
  for (const NamedTensor& t : ckpt.tensors) {
    tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"offset", offset}});
    offset += t.data.size();
  }
  header["tensors"] = tensors;
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  Append<std::uint32_t>(out, kCheckpointVersion);
  Append<std::uint64_t>(out, header_text.size());
  out += header_text;
  out.reserve(out.size() + offset * sizeof(double));
  for (const NamedTensor& t : ckpt.tensors) {
    out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
  }
  return out;
}

Checkpoint DeserializeCheckpoint(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCategory::kModel, origin + ": not a checkpoint file");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = Read<std::uint32_t>(bytes, pos, origin);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCategory::kModel,
                origin + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_size = Read<std::uint64_t>(bytes, pos, origin);
  if (pos + header_size > bytes.size()) {
    throw Error(ErrorCategory::kModel, origin + ": truncated checkpoint header");
  }
  json header;
  try {
    header = json::parse(bytes.substr(pos, header_size));
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kModel, origin + ": bad checkpoint header: " + e.what());
  }
  pos += header_size;
  const std::size_t payload = pos;

  Checkpoint ckpt;
  ckpt.role = header.at("role").get<std::string>();
  ckpt.config = EncoderConfig::FromJson(header.at("config"));
  ckpt.vocab = header.at("vocab").get<std::vector<std::string>>();
  ckpt.metadata = header.value("metadata", json::object());
  for (const json& t : header.at("tensors")) {
    NamedTensor nt;
    nt.name = t.at("name").get<std::string>();
    nt.rows = t.at("shape")[0].get<int>();
    nt.cols = t.at("shape")[1].get<int>();
    const auto offset = t.at("offset").get<std::size_t>();
    const std::size_t count = static_cast<std::size_t>(nt.rows) * static_cast<std::size_t>(nt.cols);
    const std::size_t begin = payload + offset * sizeof(double);
    if (begin + count * sizeof(double) > bytes.size()) {
      throw Error(ErrorCategory::kModel, origin + ": tensor " + nt.name + " out of range");
    }
    nt.data.resize(count);
    std::memcpy(nt.data.data(), bytes.data() + begin, count * sizeof(double));
    ckpt.tensors.push_back(std::move(nt));
  }
  return ckpt;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  WriteFileAtomic(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(ReadFile(path), path.string());
}

}  // namespace dmr
