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

#ifndef DMR_MODEL_CHECKPOINT_HPP_
#define DMR_MODEL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmr/model/tensor.hpp"
#include "dmr/model/vocab.hpp"
#include "json.hpp"

namespace dmr {

// On-disk layout:
//   "DMRCKPT\0" | u32 version | u64 header bytes | JSON header | f64 payload
// The header lists role, encoder config, vocabulary, metadata and every
// tensor's name, shape and payload offset (in elements). All integers and
// floats are little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major
};

struct Checkpoint {
  std::string role;  // "masker", "reconstructor" or "classifier"
  EncoderConfig config;
  std::vector<std::string> vocab;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const NamedTensor* Find(const std::string& name) const;
};

std::string SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint DeserializeCheckpoint(const std::string& bytes, const std::string& origin = "<memory>");
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

template <typename Scalar>
std::vector<NamedTensor> ExportTensors(const ParameterList<Scalar>& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const Parameter<Scalar>* p : params) {
    NamedTensor t{p->name, static_cast<int>(p->value.rows()), static_cast<int>(p->value.cols()), {}};
    t.data.resize(static_cast<std::size_t>(p->value.size()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      t.data[static_cast<std::size_t>(i)] = static_cast<double>(p->value.data()[i]);
    }
    out.push_back(std::move(t));
  }
  return out;
}

// Copies tensors into parameters by name; every parameter must be present
// with a matching shape.
template <typename Scalar>
void ImportTensors(const Checkpoint& ckpt, const ParameterList<Scalar>& params) {
  for (Parameter<Scalar>* p : params) {
    const NamedTensor* t = ckpt.Find(p->name);
    if (t == nullptr) throw Error(ErrorCategory::kModel, "checkpoint lacks tensor " + p->name);
    if (t->rows != p->value.rows() || t->cols != p->value.cols()) {
      throw Error(ErrorCategory::kModel, "shape mismatch for tensor " + p->name);
    }
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      p->value.data()[i] = static_cast<Scalar>(t->data[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace dmr

#endif  // DMR_MODEL_CHECKPOINT_HPP_
