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

#ifndef DMR_MODEL_MASKER_HPP_
#define DMR_MODEL_MASKER_HPP_

#include <string>
#include <vector>

#include "dmr/model/encoder.hpp"

namespace dmr {

// Column layout of two-way logits. For the masker column 0 is "keep" and
// column 1 is "mask"; a supervised classifier uses column 1 for "answer".
inline constexpr int kKeepColumn = 0;
inline constexpr int kMaskColumn = 1;

// Per-position two-way classifier on top of an encoder.
template <typename Scalar>
class TokenClassifier {
 public:
  struct Cache {
    std::vector<int> ids;
    typename Encoder<Scalar>::Cache encoder;
    Matrix<Scalar> hidden;
  };

  TokenClassifier() = default;
  explicit TokenClassifier(const EncoderConfig& config, const std::string& name = "masker")
      : encoder_(name + ".encoder", config), head_(name + ".head", config.hidden_size, 2) {}

  void Init(Rng& rng, double stddev = 0.02) {
    encoder_.Init(rng, stddev);
    head_.Init(rng, stddev);
  }

  const EncoderConfig& config() const { return encoder_.config(); }

  Matrix<Scalar> Logits(const SubwordEncoding& enc, Cache& cache) const {
    if (enc.ids.size() != enc.subword_to_word.size()) {
      throw Error(ErrorCategory::kModel, "encoding " + enc.passage_id + ": length mismatch");
    }
    cache.ids = enc.ids;
    cache.hidden = encoder_.Forward(encoder_.Embed(enc.ids), cache.encoder);
    return head_.Forward(cache.hidden);
  }

  void Backward(const Matrix<Scalar>& dlogits, const Cache& cache) {
    const Matrix<Scalar> dhidden = head_.Backward(cache.hidden, dlogits);
    encoder_.EmbedBackward(cache.ids, encoder_.Backward(dhidden, cache.encoder));
  }

  ParameterList<Scalar> Parameters() {
    ParameterList<Scalar> out;
    encoder_.Collect(out);
    head_.Collect(out);
    return out;
  }

  Linear<Scalar>& head() { return head_; }

 private:
  Encoder<Scalar> encoder_;
  Linear<Scalar> head_;
};

template <typename Scalar>
struct MaskerOutput {
  Matrix<Scalar> logits;            // (L x 2): keep, mask
  Vector<Scalar> keep_prob;         // softmax keep probability; 1 at special positions
  std::vector<std::uint8_t> special;
};

template <typename Scalar>
MaskerOutput<Scalar> MaskerForward(const TokenClassifier<Scalar>& masker,
                                   const SubwordEncoding& enc,
                                   typename TokenClassifier<Scalar>::Cache& cache) {
  MaskerOutput<Scalar> out;
  out.logits = masker.Logits(enc, cache);
  const auto n = out.logits.rows();
  out.keep_prob.resize(n);
  out.special.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool special = enc.is_special(static_cast<int>(i));
    out.special[static_cast<std::size_t>(i)] = special ? 1 : 0;
    out.keep_prob(i) =
        special ? Scalar(1) : Sigmoid(out.logits(i, kKeepColumn) - out.logits(i, kMaskColumn));
  }
  return out;
}

template <typename Scalar>
MaskerOutput<Scalar> MaskerForward(const TokenClassifier<Scalar>& masker,
                                   const SubwordEncoding& enc) {
  typename TokenClassifier<Scalar>::Cache cache;
  return MaskerForward(masker, enc, cache);
}

}  // namespace dmr

#endif  // DMR_MODEL_MASKER_HPP_
