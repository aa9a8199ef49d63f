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

#ifndef DMR_MODEL_GUMBEL_HPP_
#define DMR_MODEL_GUMBEL_HPP_

#include <cstdint>
#include <vector>

#include "dmr/model/masker.hpp"
#include "dmr/random.hpp"

namespace dmr {

// Straight-through Gumbel-Softmax sample of keep/mask decisions.
struct MaskDecision {
  std::vector<std::uint8_t> hard;     // 1 = keep
  std::vector<double> soft_keep;      // tau-softmax of the perturbed logits
  std::vector<std::uint8_t> special;  // forced keep, no gradient
  std::uint64_t gumbel_seed = 0;
  double temperature = 1.0;

  int size() const { return static_cast<int>(hard.size()); }
};

enum class GateMode {
  kStraightThrough,  // forward uses the hard value, backward the soft one
  kSoft,             // forward and backward both use the soft value
};

// Forward: add independent Gumbel(0,1) noise to both logits and keep iff the
// perturbed keep logit wins. The hard decision does not depend on tau.
template <typename Scalar>
MaskDecision StGumbelSample(const MaskerOutput<Scalar>& output, double temperature,
                            std::uint64_t seed) {
  if (!(temperature > 0.0)) throw Error(ErrorCategory::kConfig, "temperature must be > 0");
  MaskDecision d;
  const auto n = static_cast<std::size_t>(output.logits.rows());
  d.hard.resize(n);
  d.soft_keep.resize(n);
  d.special = output.special;
  d.gumbel_seed = seed;
  d.temperature = temperature;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double g_keep = rng.Gumbel();
    const double g_mask = rng.Gumbel();
    if (d.special[i]) {
      d.hard[i] = 1;
      d.soft_keep[i] = 1.0;
      continue;
    }
    const auto r = static_cast<Eigen::Index>(i);
    const double keep = static_cast<double>(output.logits(r, kKeepColumn)) + g_keep;
    const double mask = static_cast<double>(output.logits(r, kMaskColumn)) + g_mask;
    d.hard[i] = keep >= mask ? 1 : 0;
    d.soft_keep[i] = Sigmoid((keep - mask) / temperature);
  }
  return d;
}

template <typename Scalar>
Vector<Scalar> GateValues(const MaskDecision& d, GateMode mode) {
  Vector<Scalar> g(d.size());
  for (int i = 0; i < d.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    g(i) = mode == GateMode::kStraightThrough ? Scalar(d.hard[k]) : Scalar(d.soft_keep[k]);
  }
  return g;
}

// Maps dL/dgate onto the masker logits through the soft path:
// d soft / d keep_logit = s (1 - s) / tau = -d soft / d mask_logit.
template <typename Scalar>
Matrix<Scalar> GateBackward(const MaskDecision& d, const Vector<Scalar>& dgate) {
  Matrix<Scalar> dlogits = Matrix<Scalar>::Zero(d.size(), 2);
  for (int i = 0; i < d.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (d.special[k]) continue;
    const double s = d.soft_keep[k];
    const Scalar ds = static_cast<Scalar>(s * (1.0 - s) / d.temperature) * dgate(i);
    dlogits(i, kKeepColumn) = ds;
    dlogits(i, kMaskColumn) = -ds;
  }
  return dlogits;
}

// Fraction of non-special positions whose hard decision is "mask".
double MaskRate(const MaskDecision& d);

}  // namespace dmr

#endif  // DMR_MODEL_GUMBEL_HPP_
