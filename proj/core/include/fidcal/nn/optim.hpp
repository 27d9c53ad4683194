// Copyright 2026 The fidcal Authors
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

#pragma once

#include <cmath>
#include <vector>

#include "fidcal/nn/layers.hpp"

namespace fidcal::nn {

template <typename T>
void zero_grads(const ParamRefs<T>& params) {
  for (Param<T>* p : params) p->zero_grad();
}

/// SGD with Nesterov momentum: v <- mu v + g; p <- p - lr (g + mu v).
/// Optional decoupled-from-nothing classic L2 (added to the gradient).
template <typename T>
class Nag {
 public:
  explicit Nag(ParamRefs<T> params, T momentum = T(0.9), T weight_decay = T(0))
      : params_(std::move(params)), mu_(momentum), wd_(weight_decay) {
    velocity_.reserve(params_.size());
    for (Param<T>* p : params_) velocity_.emplace_back(p->value.shape());
  }

  void step(T lr) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param<T>* p = params_[i];
      if (!p->trainable) continue;
      TensorT<T>& v = velocity_[i];
      for (std::size_t j = 0; j < p->value.size(); ++j) {
        T g = p->grad[j];
        if (wd_ != T(0)) g += wd_ * p->value[j];
        v[j] = mu_ * v[j] + g;
        p->value[j] -= lr * (g + mu_ * v[j]);
      }
    }
  }

  void zero_grad() { zero_grads(params_); }

 private:
  ParamRefs<T> params_;
  T mu_, wd_;
  std::vector<TensorT<T>> velocity_;
};

/// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8 defaults).
template <typename T>
class Adam {
 public:
  explicit Adam(ParamRefs<T> params, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8),
                T weight_decay = T(0))
      : params_(std::move(params)), b1_(beta1), b2_(beta2), eps_(eps), wd_(weight_decay) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Param<T>* p : params_) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }

  void step(T lr) {
    ++t_;
    const T bc1 = T(1) - std::pow(b1_, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(b2_, static_cast<T>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param<T>* p = params_[i];
      if (!p->trainable) continue;
      for (std::size_t j = 0; j < p->value.size(); ++j) {
        T g = p->grad[j];
        if (wd_ != T(0)) g += wd_ * p->value[j];
        m_[i][j] = b1_ * m_[i][j] + (T(1) - b1_) * g;
        v_[i][j] = b2_ * v_[i][j] + (T(1) - b2_) * g * g;
        const T mhat = m_[i][j] / bc1;
        const T vhat = v_[i][j] / bc2;
        p->value[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  void zero_grad() { zero_grads(params_); }

 private:
  ParamRefs<T> params_;
  T b1_, b2_, eps_, wd_;
  long t_ = 0;
  std::vector<TensorT<T>> m_, v_;
};

}  // namespace fidcal::nn
