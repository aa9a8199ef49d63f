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

#ifndef DMR_MODEL_RECONSTRUCTOR_HPP_
#define DMR_MODEL_RECONSTRUCTOR_HPP_

#include <string>
#include <vector>

#include "dmr/model/encoder.hpp"

namespace dmr {

// Masked-LM over the gated input: predicts a vocabulary distribution at
// every position.
template <typename Scalar>
class Reconstructor {
 public:
  struct Cache {
    typename Encoder<Scalar>::Cache encoder;
    Matrix<Scalar> hidden;
    Matrix<Scalar> log_probs;
  };

  Reconstructor() = default;
  explicit Reconstructor(const EncoderConfig& config, const std::string& name = "reconstructor")
      : encoder_(name + ".encoder", config),
        head_(name + ".head", config.hidden_size, config.vocab_size) {}

  void Init(Rng& rng, double stddev = 0.02) {
    encoder_.Init(rng, stddev);
    head_.Init(rng, stddev);
  }

  const EncoderConfig& config() const { return encoder_.config(); }
  const Matrix<Scalar>& token_embeddings() const { return encoder_.token_embeddings(); }

  // Row i = g_i e(token_i) + (1 - g_i) e([MASK]). Special positions always
  // keep their own embedding.
  Matrix<Scalar> ApplyMask(const SubwordEncoding& enc, const Vector<Scalar>& gate) const {
    if (gate.size() != enc.size()) throw Error(ErrorCategory::kModel, "gate length mismatch");
    const Matrix<Scalar>& table = encoder_.token_embeddings();
    Matrix<Scalar> x(enc.size(), table.cols());
    for (int i = 0; i < enc.size(); ++i) {
      const int id = enc.ids[static_cast<std::size_t>(i)];
      if (enc.is_special(i)) {
        x.row(i) = table.row(id);
      } else {
        x.row(i) = gate(i) * table.row(id) + (Scalar(1) - gate(i)) * table.row(SubwordVocab::kMask);
      }
    }
    return x;
  }

  // Accumulates embedding gradients and returns dL/dgate.
  Vector<Scalar> ApplyMaskBackward(const SubwordEncoding& enc, const Vector<Scalar>& gate,
                                   const Matrix<Scalar>& dx) {
    Parameter<Scalar>& table = encoder_.token_parameter();
    Vector<Scalar> dgate = Vector<Scalar>::Zero(enc.size());
    for (int i = 0; i < enc.size(); ++i) {
      const int id = enc.ids[static_cast<std::size_t>(i)];
      if (enc.is_special(i)) {
        table.grad.row(id) += dx.row(i);
        continue;
      }
      table.grad.row(id) += gate(i) * dx.row(i);
      table.grad.row(SubwordVocab::kMask) += (Scalar(1) - gate(i)) * dx.row(i);
      dgate(i) = dx.row(i).dot(table.value.row(id) - table.value.row(SubwordVocab::kMask));
    }
    return dgate;
  }

  // Log-probabilities over the vocabulary, one row per position.
  Matrix<Scalar> Forward(const Matrix<Scalar>& masked, Cache& cache) const {
    if (masked.cols() != encoder_.config().hidden_size) {
      throw Error(ErrorCategory::kModel, "reconstructor input width mismatch");
    }
    cache.hidden = encoder_.Forward(encoder_.AddPositions(masked), cache.encoder);
    cache.log_probs = RowLogSoftmax(head_.Forward(cache.hidden));
    return cache.log_probs;
  }

  // Returns dL/d(masked embeddings).
  Matrix<Scalar> Backward(const Matrix<Scalar>& dlog_probs, const Cache& cache) {
    const Matrix<Scalar> dlogits = RowLogSoftmaxBackward(cache.log_probs, dlog_probs);
    const Matrix<Scalar> dhidden = head_.Backward(cache.hidden, dlogits);
    Matrix<Scalar> dx = encoder_.Backward(dhidden, cache.encoder);
    encoder_.AddPositionsBackward(dx);
    return dx;
  }

  ParameterList<Scalar> Parameters() {
    ParameterList<Scalar> out;
    encoder_.Collect(out);
    head_.Collect(out);
    return out;
  }

 private:
  Encoder<Scalar> encoder_;
  Linear<Scalar> head_;
};

}  // namespace dmr

#endif  // DMR_MODEL_RECONSTRUCTOR_HPP_
