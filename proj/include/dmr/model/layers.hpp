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

#ifndef DMR_MODEL_LAYERS_HPP_
#define DMR_MODEL_LAYERS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "dmr/model/ops.hpp"
#include "dmr/model/tensor.hpp"

namespace dmr {

// y = x W + b, with W stored as (in x out).
template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out)
      : weight_(name + ".weight", in, out), bias_(name + ".bias", 1, out, false) {}

  void Init(Rng& rng, double stddev) {
    weight_.InitNormal(rng, stddev);
    bias_.value.setZero();
  }

  Matrix<Scalar> Forward(const Matrix<Scalar>& x) const {
    Matrix<Scalar> y = x * weight_.value;
    y.rowwise() += bias_.value.row(0);
    return y;
  }

  // Accumulates parameter gradients and returns dL/dx.
  Matrix<Scalar> Backward(const Matrix<Scalar>& x, const Matrix<Scalar>& dy) {
    weight_.grad.noalias() += x.transpose() * dy;
    bias_.grad.row(0) += dy.colwise().sum();
    return dy * weight_.value.transpose();
  }

  void Collect(ParameterList<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }
  const Parameter<Scalar>& weight() const { return weight_; }
  const Parameter<Scalar>& bias() const { return bias_; }

 private:
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
};

template <typename Scalar>
class LayerNorm {
 public:
  struct Cache {
    Matrix<Scalar> xhat;
    Vector<Scalar> inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim)
      : gamma_(name + ".gamma", 1, dim, false), beta_(name + ".beta", 1, dim, false) {
    gamma_.value.setOnes();
  }

  Matrix<Scalar> Forward(const Matrix<Scalar>& x, Cache& cache) const {
    const Eigen::Index d = x.cols();
    const Vector<Scalar> mean = x.rowwise().mean();
    cache.xhat = x.colwise() - mean;
    const Vector<Scalar> var = cache.xhat.array().square().rowwise().sum() / Scalar(d);
    cache.inv_std = (var.array() + Scalar(kEps)).rsqrt();
    cache.xhat.array().colwise() *= cache.inv_std.array();
    Matrix<Scalar> y = cache.xhat.array().rowwise() * gamma_.value.row(0).array();
    y.rowwise() += beta_.value.row(0);
    return y;
  }

  Matrix<Scalar> Backward(const Matrix<Scalar>& dy, const Cache& cache) {
    gamma_.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
    beta_.grad.row(0) += dy.colwise().sum();
    const Matrix<Scalar> dxhat = dy.array().rowwise() * gamma_.value.row(0).array();
    const Vector<Scalar> mean_d = dxhat.rowwise().mean();
    const Vector<Scalar> mean_dx = (dxhat.array() * cache.xhat.array()).rowwise().mean();
    Matrix<Scalar> dx = dxhat.colwise() - mean_d;
    dx.array() -= cache.xhat.array().colwise() * mean_dx.array();
    dx.array().colwise() *= cache.inv_std.array();
    return dx;
  }

  void Collect(ParameterList<Scalar>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

 private:
  static constexpr double kEps = 1e-5;
  Parameter<Scalar> gamma_;
  Parameter<Scalar> beta_;
};

// Multi-head scaled dot-product self-attention over one sequence.
template <typename Scalar>
class SelfAttention {
 public:
  struct Cache {
    Matrix<Scalar> x, q, k, v, context;
    std::vector<Matrix<Scalar>> probs;  // one (L x L) matrix per head
  };

  SelfAttention() = default;
  SelfAttention(const std::string& name, int dim, int heads)
      : heads_(heads),
        query_(name + ".query", dim, dim),
        key_(name + ".key", dim, dim),
        value_(name + ".value", dim, dim),
        output_(name + ".output", dim, dim) {}

  void Init(Rng& rng, double stddev) {
    query_.Init(rng, stddev);
    key_.Init(rng, stddev);
    value_.Init(rng, stddev);
    output_.Init(rng, stddev);
  }

  Matrix<Scalar> Forward(const Matrix<Scalar>& x, Cache& cache) const {
    const int dim = static_cast<int>(x.cols());
    const int head_dim = dim / heads_;
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(head_dim));
    cache.x = x;
    cache.q = query_.Forward(x);
    cache.k = key_.Forward(x);
    cache.v = value_.Forward(x);
    cache.context.resize(x.rows(), dim);
    cache.probs.resize(static_cast<std::size_t>(heads_));
    for (int h = 0; h < heads_; ++h) {
      const int c = h * head_dim;
      Matrix<Scalar> scores =
          (cache.q.middleCols(c, head_dim) * cache.k.middleCols(c, head_dim).transpose()) * scale;
      Matrix<Scalar>& p = cache.probs[static_cast<std::size_t>(h)];
      p = RowSoftmax(scores);
      cache.context.middleCols(c, head_dim).noalias() = p * cache.v.middleCols(c, head_dim);
    }
    return output_.Forward(cache.context);
  }

  Matrix<Scalar> Backward(const Matrix<Scalar>& dy, const Cache& cache) {
    const int dim = static_cast<int>(cache.x.cols());
    const int head_dim = dim / heads_;
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(head_dim));
    const Matrix<Scalar> dcontext = output_.Backward(cache.context, dy);
    Matrix<Scalar> dq(cache.q.rows(), dim), dk(cache.k.rows(), dim), dv(cache.v.rows(), dim);
    for (int h = 0; h < heads_; ++h) {
      const int c = h * head_dim;
      const Matrix<Scalar>& p = cache.probs[static_cast<std::size_t>(h)];
      const Matrix<Scalar> dctx = dcontext.middleCols(c, head_dim);
      const Matrix<Scalar> dp = dctx * cache.v.middleCols(c, head_dim).transpose();
      dv.middleCols(c, head_dim).noalias() = p.transpose() * dctx;
      const Matrix<Scalar> ds = RowSoftmaxBackward(p, dp) * scale;
      dq.middleCols(c, head_dim).noalias() = ds * cache.k.middleCols(c, head_dim);
      dk.middleCols(c, head_dim).noalias() = ds.transpose() * cache.q.middleCols(c, head_dim);
    }
    Matrix<Scalar> dx = query_.Backward(cache.x, dq);
    dx += key_.Backward(cache.x, dk);
    dx += value_.Backward(cache.x, dv);
    return dx;
  }

  void Collect(ParameterList<Scalar>& out) {
    query_.Collect(out);
    key_.Collect(out);
    value_.Collect(out);
    output_.Collect(out);
  }

 private:
  int heads_ = 1;
  Linear<Scalar> query_, key_, value_, output_;
};

template <typename Scalar>
class FeedForward {
 public:
  struct Cache {
    Matrix<Scalar> x, pre, act;
  };

  FeedForward() = default;
  FeedForward(const std::string& name, int dim, int inner)
      : in_(name + ".in", dim, inner), out_(name + ".out", inner, dim) {}

  void Init(Rng& rng, double stddev) {
    in_.Init(rng, stddev);
    out_.Init(rng, stddev);
  }

  Matrix<Scalar> Forward(const Matrix<Scalar>& x, Cache& cache) const {
    cache.x = x;
    cache.pre = in_.Forward(x);
    cache.act = cache.pre.unaryExpr([](Scalar v) { return Gelu(v); });
    return out_.Forward(cache.act);
  }

  Matrix<Scalar> Backward(const Matrix<Scalar>& dy, const Cache& cache) {
    Matrix<Scalar> dact = out_.Backward(cache.act, dy);
    dact.array() *= cache.pre.unaryExpr([](Scalar v) { return GeluDerivative(v); }).array();
    return in_.Backward(cache.x, dact);
  }

  void Collect(ParameterList<Scalar>& out) {
    in_.Collect(out);
    out_.Collect(out);
  }

 private:
  Linear<Scalar> in_, out_;
};

// Pre-norm transformer block: h = x + Attn(LN(x)); y = h + FF(LN(h)).
template <typename Scalar>
class EncoderLayer {
 public:
  struct Cache {
    typename LayerNorm<Scalar>::Cache norm1, norm2;
    typename SelfAttention<Scalar>::Cache attention;
    typename FeedForward<Scalar>::Cache ff;
  };

  EncoderLayer() = default;
  EncoderLayer(const std::string& name, int dim, int heads, int inner)
      : norm1_(name + ".norm1", dim),
        attention_(name + ".attention", dim, heads),
        norm2_(name + ".norm2", dim),
        ff_(name + ".ff", dim, inner) {}

  void Init(Rng& rng, double stddev) {
    attention_.Init(rng, stddev);
    ff_.Init(rng, stddev);
  }

  Matrix<Scalar> Forward(const Matrix<Scalar>& x, Cache& cache) const {
    Matrix<Scalar> h = x + attention_.Forward(norm1_.Forward(x, cache.norm1), cache.attention);
    return h + ff_.Forward(norm2_.Forward(h, cache.norm2), cache.ff);
  }

  Matrix<Scalar> Backward(const Matrix<Scalar>& dy, const Cache& cache) {
    Matrix<Scalar> dh = dy + norm2_.Backward(ff_.Backward(dy, cache.ff), cache.norm2);
    return dh + norm1_.Backward(attention_.Backward(dh, cache.attention), cache.norm1);
  }

  void Collect(ParameterList<Scalar>& out) {
    norm1_.Collect(out);
    attention_.Collect(out);
    norm2_.Collect(out);
    ff_.Collect(out);
  }

 private:
  LayerNorm<Scalar> norm1_;
  SelfAttention<Scalar> attention_;
  LayerNorm<Scalar> norm2_;
  FeedForward<Scalar> ff_;
};

}  // namespace dmr

#endif  // DMR_MODEL_LAYERS_HPP_
