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

#ifndef DMR_MODEL_TENSOR_HPP_
#define DMR_MODEL_TENSOR_HPP_

#include <Eigen/Core>

#include <string>
#include <vector>

#include "dmr/random.hpp"

namespace dmr {

// Activations are laid out one row per sequence position.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// A named trainable tensor and its accumulated gradient.
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool decay = true;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols, bool weight_decay = true)
      : name(std::move(n)),
        value(Matrix<Scalar>::Zero(rows, cols)),
        grad(Matrix<Scalar>::Zero(rows, cols)),
        decay(weight_decay) {}

  void ZeroGrad() { grad.setZero(); }

  void InitNormal(Rng& rng, double stddev) {
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      value.data()[i] = static_cast<Scalar>(stddev * rng.Normal());
    }
  }
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar>*>;

template <typename Scalar>
void ZeroGrads(const ParameterList<Scalar>& params) {
  for (Parameter<Scalar>* p : params) p->ZeroGrad();
}

}  // namespace dmr

#endif  // DMR_MODEL_TENSOR_HPP_
