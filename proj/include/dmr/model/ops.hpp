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

#ifndef DMR_MODEL_OPS_HPP_
#define DMR_MODEL_OPS_HPP_

#include <cmath>

#include "dmr/model/tensor.hpp"

namespace dmr {

// Numerically stable softmax over each row.
template <typename Derived>
Matrix<typename Derived::Scalar> RowSoftmax(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return out;
}

template <typename Derived>
Matrix<typename Derived::Scalar> RowLogSoftmax(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const Scalar m = row.maxCoeff();
    const Scalar lse = m + std::log((row.array() - m).exp().sum());
    row.array() -= lse;
  }
  return out;
}

// Gradient of the input of a row-wise softmax given the output y and dL/dy.
template <typename D1, typename D2>
Matrix<typename D1::Scalar> RowSoftmaxBackward(const Eigen::MatrixBase<D1>& y,
                                               const Eigen::MatrixBase<D2>& dy) {
  using Scalar = typename D1::Scalar;
  const Vector<Scalar> dot = (y.array() * dy.array()).rowwise().sum();
  return (y.array() * (dy.array().colwise() - dot.array())).matrix();
}

// Gradient of the input of a row-wise log-softmax given its output.
template <typename D1, typename D2>
Matrix<typename D1::Scalar> RowLogSoftmaxBackward(const Eigen::MatrixBase<D1>& log_y,
                                                  const Eigen::MatrixBase<D2>& dy) {
  using Scalar = typename D1::Scalar;
  const Vector<Scalar> total = dy.rowwise().sum();
  return (dy.array() - log_y.array().exp().colwise() * total.array()).matrix();
}

// tanh approximation of GELU.
template <typename Scalar>
inline Scalar Gelu(Scalar x) {
  constexpr Scalar kC = Scalar(0.7978845608028654);
  const Scalar t = std::tanh(kC * (x + Scalar(0.044715) * x * x * x));
  return Scalar(0.5) * x * (Scalar(1) + t);
}

template <typename Scalar>
inline Scalar GeluDerivative(Scalar x) {
  constexpr Scalar kC = Scalar(0.7978845608028654);
  const Scalar t = std::tanh(kC * (x + Scalar(0.044715) * x * x * x));
  return Scalar(0.5) * (Scalar(1) + t) +
         Scalar(0.5) * x * (Scalar(1) - t * t) * kC *
             (Scalar(1) + Scalar(3 * 0.044715) * x * x);
}

template <typename Scalar>
inline Scalar Sigmoid(Scalar x) {
  if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

}  // namespace dmr

#endif  // DMR_MODEL_OPS_HPP_
