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

#ifndef DMR_MODEL_ENCODER_HPP_
#define DMR_MODEL_ENCODER_HPP_

#include <string>
#include <vector>

#include "dmr/model/layers.hpp"
#include "dmr/model/vocab.hpp"

namespace dmr {

// Transformer encoder with learned token and position embeddings. The
// embedding lookup is separate from Forward so callers can feed mixed
// embeddings (see Reconstructor::ApplyMask).
template <typename Scalar>
class Encoder {
 public:
  struct Cache {
    std::vector<typename EncoderLayer<Scalar>::Cache> layers;
    typename LayerNorm<Scalar>::Cache final_norm;
  };

  Encoder() = default;
  Encoder(const std::string& name, const EncoderConfig& config)
      : config_(config),
        tokens_(name + ".embeddings.token", config.vocab_size, config.hidden_size, false),
        positions_(name + ".embeddings.position", config.max_input_length, config.hidden_size,
                   false),
        final_norm_(name + ".final_norm", config.hidden_size) {
    config.Validate();
    for (int l = 0; l < config.num_layers; ++l) {
      layers_.emplace_back(name + ".layer" + std::to_string(l), config.hidden_size,
                           config.num_heads, config.ff_size);
    }
  }

  void Init(Rng& rng, double stddev = 0.02) {
    tokens_.InitNormal(rng, stddev);
    positions_.InitNormal(rng, stddev);
    for (auto& layer : layers_) layer.Init(rng, stddev);
  }

  const EncoderConfig& config() const { return config_; }
  const Matrix<Scalar>& token_embeddings() const { return tokens_.value; }
  Parameter<Scalar>& token_parameter() { return tokens_; }

  // Sum of token and position embeddings, one row per position.
  Matrix<Scalar> Embed(const std::vector<int>& ids) const {
    CheckLength(ids.size());
    Matrix<Scalar> x(static_cast<Eigen::Index>(ids.size()), config_.hidden_size);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      x.row(r) = tokens_.value.row(ids[i]) + positions_.value.row(r);
    }
    return x;
  }

  void EmbedBackward(const std::vector<int>& ids, const Matrix<Scalar>& dx) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      tokens_.grad.row(ids[i]) += dx.row(r);
      positions_.grad.row(r) += dx.row(r);
    }
  }

  // Adds position embeddings to caller-provided token embeddings.
  Matrix<Scalar> AddPositions(Matrix<Scalar> x) const {
    CheckLength(static_cast<std::size_t>(x.rows()));
    x += positions_.value.topRows(x.rows());
    return x;
  }

  void AddPositionsBackward(const Matrix<Scalar>& dx) {
    positions_.grad.topRows(dx.rows()) += dx;
  }

  Matrix<Scalar> Forward(const Matrix<Scalar>& x, Cache& cache) const {
    if (x.cols() != config_.hidden_size) {
      throw Error(ErrorCategory::kModel, "encoder input width mismatch");
    }
    cache.layers.resize(layers_.size());
    Matrix<Scalar> h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) h = layers_[l].Forward(h, cache.layers[l]);
    return final_norm_.Forward(h, cache.final_norm);
  }

  Matrix<Scalar> Backward(const Matrix<Scalar>& dy, const Cache& cache) {
    Matrix<Scalar> d = final_norm_.Backward(dy, cache.final_norm);
    for (std::size_t l = layers_.size(); l-- > 0;) d = layers_[l].Backward(d, cache.layers[l]);
    return d;
  }

  void Collect(ParameterList<Scalar>& out) {
    out.push_back(&tokens_);
    out.push_back(&positions_);
    for (auto& layer : layers_) layer.Collect(out);
    final_norm_.Collect(out);
  }

 private:
  void CheckLength(std::size_t n) const {
    if (n == 0 || n > static_cast<std::size_t>(config_.max_input_length)) {
      throw Error(ErrorCategory::kModel, "sequence length " + std::to_string(n) +
                                             " outside [1, max_input_length]");
    }
  }

  EncoderConfig config_;
  Parameter<Scalar> tokens_;
  Parameter<Scalar> positions_;
  std::vector<EncoderLayer<Scalar>> layers_;
  LayerNorm<Scalar> final_norm_;
};

}  // namespace dmr

#endif  // DMR_MODEL_ENCODER_HPP_
