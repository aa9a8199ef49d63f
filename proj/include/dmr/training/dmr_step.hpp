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

#ifndef DMR_TRAINING_DMR_STEP_HPP_
#define DMR_TRAINING_DMR_STEP_HPP_

#include <cstdint>

#include "dmr/model/gumbel.hpp"
#include "dmr/model/masker.hpp"
#include "dmr/model/reconstructor.hpp"
#include "dmr/training/losses.hpp"

namespace dmr {

template <typename Scalar>
struct GateLossResult {
  double recon_loss = 0.0;
  double length_loss = 0.0;
  double total_loss = 0.0;
  Vector<Scalar> dgate;  // d total / d gate, including the embedding path
};

// Runs the reconstructor on the gated input and evaluates
// recon + lambda * length. With `backward`, accumulates reconstructor
// gradients (scaled by grad_scale) and returns d total / d gate.
template <typename Scalar>
GateLossResult<Scalar> GatedReconstruction(Reconstructor<Scalar>& reconstructor,
                                           const SubwordEncoding& enc,
                                           const Vector<Scalar>& gate, double lambda,
                                           bool backward, double grad_scale = 1.0) {
  typename Reconstructor<Scalar>::Cache cache;
  const Matrix<Scalar> masked = reconstructor.ApplyMask(enc, gate);
  const Matrix<Scalar> log_probs = reconstructor.Forward(masked, cache);
  const GatedLoss<Scalar> recon = ReconstructionLoss(gate, log_probs, enc);
  const GatedLoss<Scalar> length = LengthPenalty(gate, enc);
  GateLossResult<Scalar> out;
  out.recon_loss = recon.value;
  out.length_loss = length.value;
  out.total_loss = TotalMaskerLoss(recon.value, length.value, lambda);
  if (!backward) return out;
  const Scalar scale = static_cast<Scalar>(grad_scale);
  const Matrix<Scalar> dmasked = reconstructor.Backward(recon.dlog_probs * scale, cache);
  out.dgate = reconstructor.ApplyMaskBackward(enc, gate, dmasked);
  out.dgate += (recon.dgate + length.dgate * static_cast<Scalar>(lambda)) * scale;
  return out;
}

struct DmrStepStats {
  double recon_loss = 0.0;
  double length_loss = 0.0;
  double total_loss = 0.0;
  double mask_rate = 0.0;
};

// One self-consistency step on one passage: masker -> straight-through
// Gumbel sample -> gated reconstruction -> losses, then gradients into both
// modules (scaled by grad_scale). The reconstructor receives the gradient of
// the reconstruction loss; the masker that of recon + lambda * length.
template <typename Scalar>
DmrStepStats DmrForwardBackward(TokenClassifier<Scalar>& masker,
                                Reconstructor<Scalar>& reconstructor,
                                const SubwordEncoding& enc, double lambda, double temperature,
                                std::uint64_t gumbel_seed, GateMode mode, double grad_scale) {
  typename TokenClassifier<Scalar>::Cache masker_cache;
  const MaskerOutput<Scalar> out = MaskerForward(masker, enc, masker_cache);
  const MaskDecision decision = StGumbelSample(out, temperature, gumbel_seed);
  const Vector<Scalar> gate = GateValues<Scalar>(decision, mode);
  const GateLossResult<Scalar> loss =
      GatedReconstruction(reconstructor, enc, gate, lambda, true, grad_scale);
  masker.Backward(GateBackward(decision, loss.dgate), masker_cache);
  return {loss.recon_loss, loss.length_loss, loss.total_loss, MaskRate(decision)};
}

}  // namespace dmr

#endif  // DMR_TRAINING_DMR_STEP_HPP_
