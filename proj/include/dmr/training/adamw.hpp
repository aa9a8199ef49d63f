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

#ifndef DMR_TRAINING_ADAMW_HPP_
#define DMR_TRAINING_ADAMW_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "dmr/model/tensor.hpp"

namespace dmr {

struct AdamWOptions {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  double max_grad_norm = 0.0;  // 0 disables clipping
  long total_steps = 1;
  long warmup_steps = 0;
};

// Adam with decoupled weight decay and a linear warmup-then-decay
// learning-rate schedule.
template <typename Scalar>
class AdamW {
 public:
  AdamW(const ParameterList<Scalar>& params, const AdamWOptions& options)
      : params_(params), options_(options) {
    for (const Parameter<Scalar>* p : params_) {
      m_.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  double CurrentLearningRate() const {
    const double lr = options_.learning_rate;
    if (step_ < options_.warmup_steps) {
      return lr * static_cast<double>(step_ + 1) / static_cast<double>(options_.warmup_steps);
    }
    const long decay_steps = std::max(1L, options_.total_steps - options_.warmup_steps);
    const double frac = static_cast<double>(step_ - options_.warmup_steps) / decay_steps;
    return lr * std::max(0.0, 1.0 - frac);
  }

  double GradNorm() const {
    double total = 0.0;
    for (const Parameter<Scalar>* p : params_) total += static_cast<double>(p->grad.squaredNorm());
    return std::sqrt(total);
  }

  // Applies one update from the accumulated gradients. Returns the
  // pre-clipping gradient norm.
  double Step() {
    const double norm = GradNorm();
    double clip = 1.0;
    if (options_.max_grad_norm > 0 && norm > options_.max_grad_norm) {
      clip = options_.max_grad_norm / (norm + 1e-12);
    }
    const double lr = CurrentLearningRate();
    ++step_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Parameter<Scalar>& p = *params_[k];
      const auto g = (p.grad.array() * Scalar(clip));
      m_[k].array() = Scalar(b1) * m_[k].array() + Scalar(1 - b1) * g;
      v_[k].array() = Scalar(b2) * v_[k].array() + Scalar(1 - b2) * g.square();
      if (p.decay && options_.weight_decay > 0) {
        p.value.array() *= Scalar(1.0 - lr * options_.weight_decay);
      }
      p.value.array() -= Scalar(lr / c1) * m_[k].array() /
                         ((v_[k].array() / Scalar(c2)).sqrt() + Scalar(options_.epsilon));
    }
    return norm;
  }

  long steps() const { return step_; }

 private:
  ParameterList<Scalar> params_;
  AdamWOptions options_;
  std::vector<Matrix<Scalar>> m_, v_;
  long step_ = 0;
};

}  // namespace dmr

#endif  // DMR_TRAINING_ADAMW_HPP_
