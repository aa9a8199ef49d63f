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

#include "dmr/training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dmr/model/masker.hpp"
#include "dmr/model/reconstructor.hpp"
#include "dmr/training/adamw.hpp"
#include "dmr/training/dmr_step.hpp"
#include "json.hpp"

namespace dmr {

using json = nlohmann::json;
using Scalar = TrainScalar;

std::string TrainLog::ToJsonl() const {
  std::string out;
  for (const TrainLogRecord& r : records) {
    json j{{"step", r.step},
           {"epoch", r.epoch},
           {"recon_loss", r.recon_loss},
           {"length_loss", r.length_loss},
           {"total_loss", r.total_loss},
           {"lambda", r.lambda},
           {"mask_rate", r.mask_rate}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

double TrainLog::EpochMean(int epoch, double TrainLogRecord::*field) const {
  double sum = 0.0;
  int n = 0;
  for (const TrainLogRecord& r : records) {
    if (r.epoch != epoch) continue;
    sum += r.*field;
    ++n;
  }
  return n == 0 ? std::nan("") : sum / n;
}

namespace {

EncoderConfig MakeEncoderConfig(const TrainConfig& cfg, int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.num_layers = cfg.num_layers;
  c.hidden_size = cfg.hidden_size;
  c.num_heads = cfg.num_heads;
  c.ff_size = cfg.ff_size;
  c.max_input_length = cfg.max_input_length;
  c.Validate();
  return c;
}

std::vector<SubwordEncoding> EncodeAll(std::span<const Passage> corpus, const SubwordVocab& vocab,
                                       int max_input_length) {
  std::vector<SubwordEncoding> out;
  out.reserve(corpus.size());
  for (const Passage& p : corpus) out.push_back(EncodeSubwords(p, vocab, max_input_length));
  return out;
}

AdamWOptions MakeAdamOptions(const TrainConfig& cfg, long total_steps) {
  AdamWOptions o;
  o.learning_rate = cfg.learning_rate;
  o.beta1 = cfg.adam_beta1;
  o.beta2 = cfg.adam_beta2;
  o.epsilon = cfg.adam_epsilon;
  o.weight_decay = cfg.weight_decay;
  o.max_grad_norm = cfg.max_grad_norm;
  o.total_steps = std::max(1L, total_steps);
  o.warmup_steps = static_cast<long>(cfg.warmup_ratio * static_cast<double>(o.total_steps));
  return o;
}

// True once the last `patience` epochs each improved the loss by less than
// the relative tolerance. Patience 0 disables the check.
bool Converged(const std::vector<double>& epoch_losses, const TrainConfig& cfg) {
  const int patience = cfg.convergence_patience;
  if (patience <= 0 || static_cast<int>(epoch_losses.size()) <= patience) return false;
  for (std::size_t e = epoch_losses.size() - static_cast<std::size_t>(patience);
       e < epoch_losses.size(); ++e) {
    const double prev = epoch_losses[e - 1];
    const double improvement = (prev - epoch_losses[e]) / std::max(std::abs(prev), 1e-12);
    if (improvement >= cfg.convergence_tolerance) return false;
  }
  return true;
}

Checkpoint MakeCheckpoint(const std::string& role, const EncoderConfig& config,
                          const SubwordVocab& vocab, const ParameterList<Scalar>& params,
                          const TrainConfig& cfg, int epochs_run) {
  Checkpoint c;
  c.role = role;
  c.config = config;
  c.vocab = vocab.tokens();
  c.metadata = {{"train_config", cfg.ToMap()}, {"epochs_run", epochs_run}};
  c.tensors = ExportTensors(params);
  return c;
}

void Report(const TrainOptions& options, const std::string& message) {
  if (options.progress) options.progress(message);
}

std::string EpochDir(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch-%03d", epoch);
  return buf;
}

bool AllFinite(const DmrStepStats& s) {
  return std::isfinite(s.recon_loss) && std::isfinite(s.length_loss) && std::isfinite(s.total_loss);
}

}  // namespace

DmrTrainResult TrainDmr(std::span<const Passage> corpus, const TrainConfig& cfg,
                        const TrainOptions& options) {
  cfg.Validate();
  if (corpus.empty()) throw Error(ErrorCategory::kData, "training corpus is empty");

  const SubwordVocab vocab = SubwordVocab::Build(corpus, cfg.vocab_min_count, cfg.vocab_max_words);
  const EncoderConfig enc_cfg = MakeEncoderConfig(cfg, vocab.size());
  const std::vector<SubwordEncoding> encodings = EncodeAll(corpus, vocab, cfg.max_input_length);

  TokenClassifier<Scalar> masker(enc_cfg, "masker");
  Reconstructor<Scalar> reconstructor(enc_cfg, "reconstructor");
  {
    Rng rng(DeriveSeed(cfg.seed, "masker.init"));
    masker.Init(rng);
    masker.head().bias().value(0, kKeepColumn) = static_cast<Scalar>(cfg.masker_init_keep_bias / 2);
    masker.head().bias().value(0, kMaskColumn) = static_cast<Scalar>(-cfg.masker_init_keep_bias / 2);
  }
  {
    Rng rng(DeriveSeed(cfg.seed, "reconstructor.init"));
    reconstructor.Init(rng);
  }
  const ParameterList<Scalar> masker_params = masker.Parameters();
  const ParameterList<Scalar> recon_params = reconstructor.Parameters();

  const std::size_t n = encodings.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.effective_batch_size), n);
  const long steps_per_epoch = static_cast<long>((n + batch - 1) / batch);
  AdamW<Scalar> masker_opt(masker_params, MakeAdamOptions(cfg, cfg.epochs * steps_per_epoch));
  AdamW<Scalar> recon_opt(recon_params,
                          MakeAdamOptions(cfg, (cfg.epochs + cfg.reconstructor_warmup_epochs) *
                                                   steps_per_epoch));

  DmrTrainResult result;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  // Random-mask warmup of the reconstructor.
  for (int e = 0; e < cfg.reconstructor_warmup_epochs; ++e) {
    Rng rng(DeriveSeed(cfg.seed, "warmup", static_cast<std::uint64_t>(e)));
    rng.Shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n; b += batch) {
      const std::size_t end = std::min(n, b + batch);
      const double scale = 1.0 / static_cast<double>(end - b);
      ZeroGrads(recon_params);
      for (std::size_t k = b; k < end; ++k) {
        const SubwordEncoding& enc = encodings[order[k]];
        const double rate = cfg.warmup_min_mask_rate +
                            (cfg.warmup_max_mask_rate - cfg.warmup_min_mask_rate) * rng.Uniform();
        Vector<Scalar> gate(enc.size());
        for (int i = 0; i < enc.size(); ++i) {
          gate(i) = enc.is_special(i) || rng.Uniform() >= rate ? Scalar(1) : Scalar(0);
        }
        typename Reconstructor<Scalar>::Cache cache;
        const Matrix<Scalar> log_probs = reconstructor.Forward(reconstructor.ApplyMask(enc, gate), cache);
        const GatedLoss<Scalar> loss = FullReconstructionLoss(log_probs, enc);
        if (!std::isfinite(loss.value)) throw Error(ErrorCategory::kDivergence, "warmup diverged");
        loss_sum += loss.value;
        const Matrix<Scalar> dmasked =
            reconstructor.Backward(loss.dlog_probs * static_cast<Scalar>(scale), cache);
        reconstructor.ApplyMaskBackward(enc, gate, dmasked);
      }
      recon_opt.Step();
    }
    result.warmup_losses.push_back(loss_sum / static_cast<double>(n));
    Report(options, "warmup epoch " + std::to_string(e) +
                        " recon_loss=" + std::to_string(result.warmup_losses.back()));
  }

  std::vector<NamedTensor> good_masker = ExportTensors(masker_params);
  std::vector<NamedTensor> good_recon = ExportTensors(recon_params);
  std::vector<double> epoch_losses;
  long step = 0;
  std::uint64_t example_counter = 0;
  for (int epoch = 0; epoch < cfg.epochs && !result.diverged; ++epoch) {
    const double lambda = LambdaSchedule(epoch, cfg.epochs, cfg);
    const double tau = TemperatureSchedule(epoch, cfg.epochs, cfg);
    Rng rng(DeriveSeed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(order);
    for (std::size_t b = 0; b < n && !result.diverged; b += batch) {
      const std::size_t end = std::min(n, b + batch);
      const double scale = 1.0 / static_cast<double>(end - b);
      ZeroGrads(masker_params);
      ZeroGrads(recon_params);
      TrainLogRecord rec{step, epoch, 0, 0, 0, lambda, 0};
      for (std::size_t k = b; k < end; ++k) {
        const DmrStepStats s = DmrForwardBackward(
            masker, reconstructor, encodings[order[k]], lambda, tau,
            DeriveSeed(cfg.seed, "gumbel", example_counter++), cfg.gate_mode, scale);
        if (!AllFinite(s)) {
          result.diverged = true;
          break;
        }
        rec.recon_loss += s.recon_loss * scale;
        rec.length_loss += s.length_loss * scale;
        rec.total_loss += s.total_loss * scale;
        rec.mask_rate += s.mask_rate * scale;
      }
      if (result.diverged) break;
      const bool update_recon = cfg.schedule == UpdateSchedule::kJoint || step % 2 == 0;
      const bool update_masker = cfg.schedule == UpdateSchedule::kJoint || step % 2 == 1;
      if (update_recon && !std::isfinite(recon_opt.Step())) result.diverged = true;
      if (update_masker && !std::isfinite(masker_opt.Step())) result.diverged = true;
      if (result.diverged) break;
      result.log.records.push_back(rec);
      ++step;
    }
    if (result.diverged) {
      Report(options, "non-finite loss in epoch " + std::to_string(epoch) +
                          "; restoring last good parameters");
      break;
    }
    result.epochs_run = epoch + 1;
    good_masker = ExportTensors(masker_params);
    good_recon = ExportTensors(recon_params);
    epoch_losses.push_back(result.log.EpochMean(epoch, &TrainLogRecord::total_loss));
    Report(options,
           "epoch " + std::to_string(epoch) + " lambda=" + std::to_string(lambda) +
               " recon=" + std::to_string(result.log.EpochMean(epoch, &TrainLogRecord::recon_loss)) +
               " total=" + std::to_string(epoch_losses.back()) +
               " mask_rate=" + std::to_string(result.log.EpochMean(epoch, &TrainLogRecord::mask_rate)));
    if (options.checkpoint_dir) {
      const auto dir = *options.checkpoint_dir / EpochDir(epoch);
      SaveCheckpoint(dir / "masker.ckpt",
                     MakeCheckpoint("masker", enc_cfg, vocab, masker_params, cfg, epoch + 1));
      SaveCheckpoint(dir / "reconstructor.ckpt", MakeCheckpoint("reconstructor", enc_cfg, vocab,
                                                                recon_params, cfg, epoch + 1));
    }
    if (Converged(epoch_losses, cfg)) {
      result.converged = true;
      break;
    }
  }

  result.masker = MakeCheckpoint("masker", enc_cfg, vocab, masker_params, cfg, result.epochs_run);
  result.reconstructor =
      MakeCheckpoint("reconstructor", enc_cfg, vocab, recon_params, cfg, result.epochs_run);
  if (result.diverged) {
    result.masker.tensors = std::move(good_masker);
    result.reconstructor.tensors = std::move(good_recon);
  }
  result.masker.metadata["diverged"] = result.diverged;
  result.reconstructor.metadata["diverged"] = result.diverged;
  if (options.checkpoint_dir) {
    SaveCheckpoint(*options.checkpoint_dir / "masker.ckpt", result.masker);
    SaveCheckpoint(*options.checkpoint_dir / "reconstructor.ckpt", result.reconstructor);
  }
  return result;
}

SupervisedTrainResult TrainSupervised(std::span<const Passage> corpus,
                                      std::span<const TokenLabelSeq> labels,
                                      const TrainConfig& cfg, const TrainOptions& options) {
  cfg.Validate();
  if (corpus.empty()) throw Error(ErrorCategory::kData, "training corpus is empty");
  if (labels.size() != corpus.size()) {
    throw Error(ErrorCategory::kData, "supervised training needs one label sequence per passage");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (labels[i].passage_id != corpus[i].id ||
        static_cast<int>(labels[i].labels.size()) != corpus[i].size()) {
      throw Error(ErrorCategory::kData, "labels misaligned for passage " + corpus[i].id);
    }
  }

  const SubwordVocab vocab = SubwordVocab::Build(corpus, cfg.vocab_min_count, cfg.vocab_max_words);
  const EncoderConfig enc_cfg = MakeEncoderConfig(cfg, vocab.size());
  const std::vector<SubwordEncoding> encodings = EncodeAll(corpus, vocab, cfg.max_input_length);

  TokenClassifier<Scalar> classifier(enc_cfg, "classifier");
  {
    Rng rng(DeriveSeed(cfg.seed, "classifier.init"));
    classifier.Init(rng);
  }
  const ParameterList<Scalar> params = classifier.Parameters();
  const std::size_t n = encodings.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.effective_batch_size), n);
  const long steps_per_epoch = static_cast<long>((n + batch - 1) / batch);
  AdamW<Scalar> opt(params, MakeAdamOptions(cfg, cfg.epochs * steps_per_epoch));

  SupervisedTrainResult result;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> epoch_losses;
  std::vector<NamedTensor> good = ExportTensors(params);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs && !result.diverged; ++epoch) {
    Rng rng(DeriveSeed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(order);
    for (std::size_t b = 0; b < n; b += batch) {
      const std::size_t end = std::min(n, b + batch);
      const double scale = 1.0 / static_cast<double>(end - b);
      ZeroGrads(params);
      TrainLogRecord rec{step, epoch, 0, 0, 0, 0, 0};
      for (std::size_t k = b; k < end; ++k) {
        const SubwordEncoding& enc = encodings[order[k]];
        const TokenLabelSeq& lab = labels[order[k]];
        typename TokenClassifier<Scalar>::Cache cache;
        const Matrix<Scalar> logits = classifier.Logits(enc, cache);
        const Matrix<Scalar> log_probs = RowLogSoftmax(logits);
        Matrix<Scalar> dlogits = Matrix<Scalar>::Zero(logits.rows(), 2);
        const double norm = std::max(1, enc.content_size());
        double loss = 0.0;
        double positive = 0.0;
        for (int i = 0; i < enc.size(); ++i) {
          if (enc.is_special(i)) continue;
          const int target = lab.labels[static_cast<std::size_t>(enc.subword_to_word[static_cast<std::size_t>(i)])];
          loss -= static_cast<double>(log_probs(i, target)) / norm;
          positive += log_probs(i, 1) > log_probs(i, 0) ? 1.0 / norm : 0.0;
          dlogits.row(i) = log_probs.row(i).array().exp().matrix();
          dlogits(i, target) -= Scalar(1);
          dlogits.row(i) *= static_cast<Scalar>(scale / norm);
        }
        if (!std::isfinite(loss)) {
          result.diverged = true;
          break;
        }
        classifier.Backward(dlogits, cache);
        rec.total_loss += loss * scale;
        rec.recon_loss += loss * scale;
        rec.mask_rate += positive * scale;
      }
      if (result.diverged || !std::isfinite(opt.Step())) {
        result.diverged = true;
        break;
      }
      result.log.records.push_back(rec);
      ++step;
    }
    if (result.diverged) break;
    result.epochs_run = epoch + 1;
    good = ExportTensors(params);
    epoch_losses.push_back(result.log.EpochMean(epoch, &TrainLogRecord::total_loss));
    Report(options, "epoch " + std::to_string(epoch) + " loss=" + std::to_string(epoch_losses.back()));
    if (options.checkpoint_dir) {
      SaveCheckpoint(*options.checkpoint_dir / EpochDir(epoch) / "classifier.ckpt",
                     MakeCheckpoint("classifier", enc_cfg, vocab, params, cfg, epoch + 1));
    }
    if (Converged(epoch_losses, cfg)) {
      result.converged = true;
      break;
    }
  }
  result.classifier = MakeCheckpoint("classifier", enc_cfg, vocab, params, cfg, result.epochs_run);
  if (result.diverged) result.classifier.tensors = std::move(good);
  result.classifier.metadata["diverged"] = result.diverged;
  if (options.checkpoint_dir) {
    SaveCheckpoint(*options.checkpoint_dir / "classifier.ckpt", result.classifier);
  }
  return result;
}

}  // namespace dmr
