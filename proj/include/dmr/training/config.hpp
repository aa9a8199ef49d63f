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

#ifndef DMR_TRAINING_CONFIG_HPP_
#define DMR_TRAINING_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "dmr/model/gumbel.hpp"

namespace dmr {

enum class UpdateSchedule {
  kJoint,        // both modules step on every batch
  kAlternating,  // even steps update the reconstructor, odd steps the masker
};

struct TrainConfig {
  // Optimizer: AdamW with linear decay to zero.
  double learning_rate = 5e-5;
  int effective_batch_size = 256;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double warmup_ratio = 0.0;
  double max_grad_norm = 1.0;

  int max_input_length = 512;
  // Epoch cap; training may stop earlier on convergence.
  int epochs = 10;
  double convergence_tolerance = 1e-3;
  int convergence_patience = 3;

  // Length-penalty weight, linear per epoch from start to end.
  double lambda_start = 0.35;
  double lambda_end = 0.65;

  // Gumbel-Softmax temperature for the backward path, annealed
  // geometrically from `temperature` to `temperature_end` across epochs.
  double temperature = 1.0;
  double temperature_end = 1.0;
  GateMode gate_mode = GateMode::kStraightThrough;
  UpdateSchedule schedule = UpdateSchedule::kJoint;

  // Epochs of random-mask reconstruction before joint training. Stands in
  // for a pretrained masked-LM when training from scratch.
  int reconstructor_warmup_epochs = 0;
  double warmup_min_mask_rate = 0.1;
  double warmup_max_mask_rate = 0.9;
  // Initial bias of the masker's keep logit minus mask logit.
  double masker_init_keep_bias = 0.0;

  std::uint64_t seed = 1;

  // Encoder shape for both modules.
  int num_layers = 2;
  int hidden_size = 64;
  int num_heads = 4;
  int ff_size = 128;
  int vocab_min_count = 2;
  int vocab_max_words = 8000;

  void Validate() const;

  // Sets one field from its textual value. Throws kConfig on unknown keys
  // or unparsable values.
  void Set(std::string_view key, std::string_view value);

  // Resolved "key = value" lines, sorted by key.
  std::map<std::string, std::string> ToMap() const;
  std::string ToKeyValue() const;

  // Reads a key-value file: "key = value" per line, '#' comments, and
  // "[section]" headers are ignored.
  static TrainConfig FromFile(const std::filesystem::path& path, TrainConfig base);
  static TrainConfig FromFile(const std::filesystem::path& path);
};

std::map<std::string, std::string> ReadKeyValueFile(const std::filesystem::path& path);

// Linear interpolation from lambda_start (epoch 0) to lambda_end (last epoch).
double LambdaSchedule(int epoch, int total_epochs, const TrainConfig& cfg);

double TemperatureSchedule(int epoch, int total_epochs, const TrainConfig& cfg);

}  // namespace dmr

#endif  // DMR_TRAINING_CONFIG_HPP_
