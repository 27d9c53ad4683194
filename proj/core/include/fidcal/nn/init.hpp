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

#include "fidcal/nn/layers.hpp"
#include "fidcal/rng.hpp"

namespace fidcal::nn {

/// Xavier/Glorot uniform: U(-limit, limit), limit = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void xavier_uniform(Param<T>& p, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
  for (auto& v : p.value.values()) v = static_cast<T>(rng.uniform(-limit, limit));
}

/// He/Kaiming uniform for ReLU fan-in: U(-limit, limit), limit = sqrt(6 / fan_in).
template <typename T>
void he_uniform(Param<T>& p, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : p.value.values()) v = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
void init_conv_he(Conv2d<T>& conv, Rng& rng) {
  const int fan_in = conv.in_channels() * conv.kernel() * conv.kernel();
  he_uniform(conv.weight(), fan_in, rng);
  conv.bias().value.fill(T(0));
}

template <typename T>
void init_conv_xavier(Conv2d<T>& conv, Rng& rng) {
  const int fan_in = conv.in_channels() * conv.kernel() * conv.kernel();
  const int fan_out = conv.out_channels() * conv.kernel() * conv.kernel();
  xavier_uniform(conv.weight(), fan_in, fan_out, rng);
  conv.bias().value.fill(T(0));
}

template <typename T>
void init_conv_zero(Conv2d<T>& conv) {
  conv.weight().value.fill(T(0));
  conv.bias().value.fill(T(0));
}

template <typename T>
void init_dense_xavier(Dense<T>& fc, Rng& rng) {
  xavier_uniform(fc.weight(), fc.in_dim(), fc.out_dim(), rng);
  fc.bias().value.fill(T(0));
}

template <typename T>
void init_dense_zero(Dense<T>& fc) {
  fc.weight().value.fill(T(0));
  fc.bias().value.fill(T(0));
}

}  // namespace fidcal::nn
