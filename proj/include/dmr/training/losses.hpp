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

#ifndef DMR_TRAINING_LOSSES_HPP_
#define DMR_TRAINING_LOSSES_HPP_

#include <cmath>

#include "dmr/model/gumbel.hpp"
#include "dmr/model/tensor.hpp"
#include "dmr/model/vocab.hpp"

namespace dmr {

// A scalar loss with its gradients w.r.t. the gate values and, where the
// loss reads them, the reconstructor log-probabilities.
template <typename Scalar>
struct GatedLoss {
  double value = 0.0;
  Vector<Scalar> dgate;
  Matrix<Scalar> dlog_probs;
};

namespace internal {

inline int ContentPositions(const SubwordEncoding& enc) {
  const int n = enc.content_size();
  if (n == 0) {
    throw Error(ErrorCategory::kData, "encoding " + enc.passage_id + " has no content positions");
  }
  return n;
}

}  // namespace internal

// (1/|P|) sum_i (1 - g_i) * (-log p_i(true token)) over non-special
// positions, where g_i is the keep gate. Kept positions contribute nothing.
template <typename Scalar>
GatedLoss<Scalar> ReconstructionLoss(const Vector<Scalar>& gate, const Matrix<Scalar>& log_probs,
                                     const SubwordEncoding& enc) {
  if (gate.size() != enc.size() || log_probs.rows() != enc.size()) {
    throw Error(ErrorCategory::kModel, "reconstruction loss: length mismatch");
  }
  const double norm = internal::ContentPositions(enc);
  GatedLoss<Scalar> out;
  out.dgate = Vector<Scalar>::Zero(enc.size());
  out.dlog_probs = Matrix<Scalar>::Zero(log_probs.rows(), log_probs.cols());
  for (int i = 0; i < enc.size(); ++i) {
    if (enc.is_special(i)) continue;
    const int target = enc.ids[static_cast<std::size_t>(i)];
    const double log_p = static_cast<double>(log_probs(i, target));
    const double masked = 1.0 - static_cast<double>(gate(i));
    out.value -= masked * log_p / norm;
    out.dgate(i) = static_cast<Scalar>(log_p / norm);
    out.dlog_probs(i, target) = static_cast<Scalar>(-masked / norm);
  }
  return out;
}

template <typename Scalar>
GatedLoss<Scalar> ReconstructionLoss(const MaskDecision& decision, const Matrix<Scalar>& log_probs,
                                     const SubwordEncoding& enc,
                                     GateMode mode = GateMode::kStraightThrough) {
  return ReconstructionLoss(GateValues<Scalar>(decision, mode), log_probs, enc);
}

// Mean keep gate over non-special positions.
template <typename Scalar>
GatedLoss<Scalar> LengthPenalty(const Vector<Scalar>& gate, const SubwordEncoding& enc) {
  if (gate.size() != enc.size()) throw Error(ErrorCategory::kModel, "length penalty: length mismatch");
  const double norm = internal::ContentPositions(enc);
  GatedLoss<Scalar> out;
  out.dgate = Vector<Scalar>::Zero(enc.size());
  for (int i = 0; i < enc.size(); ++i) {
    if (enc.is_special(i)) continue;
    out.value += static_cast<double>(gate(i)) / norm;
    out.dgate(i) = static_cast<Scalar>(1.0 / norm);
  }
  return out;
}

template <typename Scalar>
GatedLoss<Scalar> LengthPenalty(const MaskDecision& decision, const SubwordEncoding& enc,
                                GateMode mode = GateMode::kStraightThrough) {
  return LengthPenalty(GateValues<Scalar>(decision, mode), enc);
}

// L = recon + lambda * length.
double TotalMaskerLoss(double recon_loss, double length_loss, double lambda);

// Mean negative log-likelihood of every non-special position, used while
// warming the reconstructor up on random masks.
template <typename Scalar>
GatedLoss<Scalar> FullReconstructionLoss(const Matrix<Scalar>& log_probs, const SubwordEncoding& enc) {
  const double norm = internal::ContentPositions(enc);
  GatedLoss<Scalar> out;
  out.dlog_probs = Matrix<Scalar>::Zero(log_probs.rows(), log_probs.cols());
  for (int i = 0; i < enc.size(); ++i) {
    if (enc.is_special(i)) continue;
    const int target = enc.ids[static_cast<std::size_t>(i)];
    out.value -= static_cast<double>(log_probs(i, target)) / norm;
    out.dlog_probs(i, target) = static_cast<Scalar>(-1.0 / norm);
  }
  return out;
}

}  // namespace dmr

#endif  // DMR_TRAINING_LOSSES_HPP_
