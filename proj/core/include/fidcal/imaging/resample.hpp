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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fidcal/common.hpp"

namespace fidcal::imaging {

enum class Resample { bilinear, bicubic, nearest };

inline std::string to_string(Resample r) {
  switch (r) {
    case Resample::bilinear: return "bilinear";
    case Resample::bicubic: return "bicubic";
    case Resample::nearest: return "nearest";
  }
  return "bilinear";
}

inline Resample resample_from_string(const std::string& s) {
  if (s == "bilinear") return Resample::bilinear;
  if (s == "bicubic") return Resample::bicubic;
  if (s == "nearest") return Resample::nearest;
  throw Error("unknown resampling mode: " + s);
}

/// One-dimensional resampling plan under the half-pixel center convention
/// src = (dst + 0.5) * in/out - 0.5, with edge-clamped taps. Separable 2D
/// resampling applies a plan along each axis; the backward pass reuses the
/// same taps as a transposed scatter, so forward and gradient stay in sync.
template <typename T>
struct ResamplePlan {
  int in_len = 0;
  int out_len = 0;
  int taps = 0;
  std::vector<int> idx;  // out_len * taps source indices
  std::vector<T> w;      // out_len * taps weights, each row sums to 1

  static ResamplePlan make(int in_len, int out_len, Resample mode) {
    FIDCAL_CHECK(in_len > 0 && out_len > 0, "resample: lengths must be positive");
    ResamplePlan p;
    p.in_len = in_len;
    p.out_len = out_len;
    const double scale = static_cast<double>(in_len) / out_len;

    auto clampi = [in_len](int i) { return std::clamp(i, 0, in_len - 1); };

    switch (mode) {
      case Resample::nearest: {
        p.taps = 1;
        p.idx.resize(static_cast<std::size_t>(out_len));
        p.w.assign(static_cast<std::size_t>(out_len), T(1));
        for (int o = 0; o < out_len; ++o) {
          const double src = (o + 0.5) * scale;
          p.idx[o] = clampi(static_cast<int>(std::floor(src)));
        }
        break;
      }
      case Resample::bilinear: {
        p.taps = 2;
        p.idx.resize(static_cast<std::size_t>(out_len) * 2);
        p.w.resize(static_cast<std::size_t>(out_len) * 2);
        for (int o = 0; o < out_len; ++o) {
          const double src = (o + 0.5) * scale - 0.5;
          const int i0 = static_cast<int>(std::floor(src));
          const double f = src - i0;
          p.idx[2 * o] = clampi(i0);
          p.idx[2 * o + 1] = clampi(i0 + 1);
          p.w[2 * o] = static_cast<T>(1.0 - f);
          p.w[2 * o + 1] = static_cast<T>(f);
        }
        break;
      }
      case Resample::bicubic: {
        // Catmull-Rom kernel (a = -0.5); the four weights sum to 1 for any
        // fractional offset, so constant inputs are preserved.
        p.taps = 4;
        p.idx.resize(static_cast<std::size_t>(out_len) * 4);
        p.w.resize(static_cast<std::size_t>(out_len) * 4);
        const double a = -0.5;
        auto cubic = [a](double x) {
          x = std::fabs(x);
          if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
          if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
          return 0.0;
        };
        for (int o = 0; o < out_len; ++o) {
          const double src = (o + 0.5) * scale - 0.5;
          const int i0 = static_cast<int>(std::floor(src));
          const double f = src - i0;
          for (int k = 0; k < 4; ++k) {
            p.idx[4 * o + k] = clampi(i0 - 1 + k);
            p.w[4 * o + k] = static_cast<T>(cubic(f - (k - 1)));
          }
        }
        break;
      }
    }
    return p;
  }

  /// out[o] = sum_k w[o,k] * in[idx[o,k]], applied to a strided line.
  void apply(const T* in, std::size_t in_stride, T* out, std::size_t out_stride) const {
    for (int o = 0; o < out_len; ++o) {
      T acc = T(0);
      for (int k = 0; k < taps; ++k)
        acc += w[static_cast<std::size_t>(o) * taps + k] *
               in[static_cast<std::size_t>(idx[static_cast<std::size_t>(o) * taps + k]) * in_stride];
      out[static_cast<std::size_t>(o) * out_stride] = acc;
    }
  }

  /// Transposed scatter: grad_in[idx[o,k]] += w[o,k] * grad_out[o].
  void apply_transposed(const T* grad_out, std::size_t out_stride, T* grad_in,
                        std::size_t in_stride) const {
    for (int o = 0; o < out_len; ++o) {
      const T g = grad_out[static_cast<std::size_t>(o) * out_stride];
      for (int k = 0; k < taps; ++k)
        grad_in[static_cast<std::size_t>(idx[static_cast<std::size_t>(o) * taps + k]) * in_stride] +=
            w[static_cast<std::size_t>(o) * taps + k] * g;
    }
  }
};

}  // namespace fidcal::imaging
