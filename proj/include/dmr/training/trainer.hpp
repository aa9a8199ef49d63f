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

#ifndef DMR_TRAINING_TRAINER_HPP_
#define DMR_TRAINING_TRAINER_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmr/corpus.hpp"
#include "dmr/model/checkpoint.hpp"
#include "dmr/training/config.hpp"

namespace dmr {

// Scalar type used for training; checkpoints always store float64.
using TrainScalar = float;

struct TrainLogRecord {
  long step = 0;
  int epoch = 0;
  double recon_loss = 0.0;
  double length_loss = 0.0;
  double total_loss = 0.0;
  double lambda = 0.0;
  double mask_rate = 0.0;
};

struct TrainLog {
  std::vector<TrainLogRecord> records;

  // {step, epoch, recon_loss, length_loss, total_loss, lambda, mask_rate}
  std::string ToJsonl() const;
  // Mean of a field over the records of one epoch.
  double EpochMean(int epoch, double TrainLogRecord::*field) const;
};

struct TrainOptions {
  // Per-epoch checkpoints go to <dir>/epoch-NNN/, the final ones to <dir>/.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const std::string&)> progress;
};

struct DmrTrainResult {
  Checkpoint masker;
  Checkpoint reconstructor;
  TrainLog log;
  std::vector<double> warmup_losses;  // per warmup epoch
  int epochs_run = 0;
  bool converged = false;
  bool diverged = false;
};

// Self-consistency training of masker and reconstructor on raw passages.
DmrTrainResult TrainDmr(std::span<const Passage> corpus, const TrainConfig& cfg,
                        const TrainOptions& options = {});

struct SupervisedTrainResult {
  Checkpoint classifier;
  TrainLog log;
  int epochs_run = 0;
  bool converged = false;
  bool diverged = false;
};

// Token classification with cross-entropy on word labels inherited by every
// subword. Records reuse TrainLogRecord: total_loss holds the cross-entropy
// and mask_rate the fraction of positions predicted positive.
SupervisedTrainResult TrainSupervised(std::span<const Passage> corpus,
                                      std::span<const TokenLabelSeq> labels,
                                      const TrainConfig& cfg, const TrainOptions& options = {});

}  // namespace dmr

#endif  // DMR_TRAINING_TRAINER_HPP_
