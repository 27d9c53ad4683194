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

#include "fidcal/tensor.hpp"

namespace fidcal::nn {

template <typename T>
struct LossResult {
  T loss = T(0);
  TensorT<T> grad;  // d loss / d input, same shape as the input
};

/// Label-smoothed cross entropy over logits {N, K}. The target distribution
/// is q = (1 - eps) * onehot + eps / K; loss is averaged over the batch and
/// the gradient is (softmax - q) / N. Numerically stable via max-shift.
template <typename T>
LossResult<T> smoothed_cross_entropy(const TensorT<T>& logits, const std::vector<int>& labels,
                                     double eps) {
  FIDCAL_CHECK(logits.ndim() == 2, "cross_entropy: expected {N, K} logits");
  const int n = logits.dim(0), k = logits.dim(1);
  FIDCAL_CHECK(static_cast<int>(labels.size()) == n, "cross_entropy: label count mismatch");
  FIDCAL_CHECK(eps >= 0.0 && eps < 1.0, "cross_entropy: smoothing must be in [0, 1)");

  LossResult<T> result;
  result.grad = TensorT<T>(logits.shape());
  const T off = static_cast<T>(eps / k);
  const T on = static_cast<T>(1.0 - eps) + off;

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const T* row = logits.data() + static_cast<std::size_t>(i) * k;
    FIDCAL_CHECK(labels[i] >= 0 && labels[i] < k, "cross_entropy: label out of range");

    T maxv = row[0];
    for (int j = 1; j < k; ++j) maxv = std::max(maxv, row[j]);
    double sumexp = 0.0;
    for (int j = 0; j < k; ++j) sumexp += std::exp(static_cast<double>(row[j] - maxv));
    const double lse = std::log(sumexp);

    T* grow = result.grad.data() + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      const double logp = static_cast<double>(row[j] - maxv) - lse;
      const double p = std::exp(logp);
      const T q = j == labels[i] ? on : off;
      total -= static_cast<double>(q) * logp;
      grow[j] = static_cast<T>((p - static_cast<double>(q)) / n);
    }
  }
  result.loss = static_cast<T>(total / n);
  return result;
}

/// Mean absolute error; gradient is sign(pred - target) / numel.
template <typename T>
LossResult<T> l1_loss(const TensorT<T>& pred, const TensorT<T>& target) {
  FIDCAL_CHECK(pred.same_shape(target), "l1_loss: shape mismatch");
  FIDCAL_CHECK(pred.size() > 0, "l1_loss: empty input");
  LossResult<T> result;
  result.grad = TensorT<T>(pred.shape());
  double total = 0.0;
  const T inv = T(1) / static_cast<T>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T d = pred[i] - target[i];
    total += std::fabs(static_cast<double>(d));
    result.grad[i] = d > T(0) ? inv : (d < T(0) ? -inv : T(0));
  }
  result.loss = static_cast<T>(total / static_cast<double>(pred.size()));
  return result;
}

/// Fraction of rows whose argmax equals the label. Ties resolve to the
/// lowest index, matching a deterministic argmax scan.
template <typename T>
double accuracy(const TensorT<T>& logits, const std::vector<int>& labels) {
  FIDCAL_CHECK(logits.ndim() == 2, "accuracy: expected {N, K} logits");
  const int n = logits.dim(0), k = logits.dim(1);
  FIDCAL_CHECK(static_cast<int>(labels.size()) == n, "accuracy: label count mismatch");
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const T* row = logits.data() + static_cast<std::size_t>(i) * k;
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (row[j] > row[best]) best = j;
    if (best == labels[i]) ++hits;
  }
  return n > 0 ? static_cast<double>(hits) / n : 0.0;
}

template <typename T>
int argmax_row(const TensorT<T>& logits, int row) {
  const int k = logits.dim(1);
  const T* p = logits.data() + static_cast<std::size_t>(row) * k;
  int best = 0;
  for (int j = 1; j < k; ++j)
    if (p[j] > p[best]) best = j;
  return best;
}

}  // namespace fidcal::nn
