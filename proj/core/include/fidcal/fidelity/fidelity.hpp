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

#include <string>
#include <vector>

#include "fidcal/restore/denoiser.hpp"
#include "fidcal/tensor.hpp"

namespace fidcal::fidelity {

enum class Metric { l1, l2, cosine };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// Per-pixel distance between a restored image and its clean original.
/// Low values mark pixels the downstream calibration can trust.
struct FidelityMap {
  Tensor values;  // shape {1, H, W}
  Metric metric = Metric::l1;
  bool normalized = false;
  double norm_mean = 0.0;  // constants applied by normalize()
  double norm_std = 1.0;
};

/// Moments of the assumed zero-mean Gaussian noise mixture and of the
/// distributions its l1 (half-normal) and l2 (Gamma) maps follow.
struct NoiseMixtureStats {
  double sigma_sq = 0.0;               // mixture variance, halved if requested
  double post_restore_sigma_sq = 0.0;  // always half of the unhalved mixture variance
  double half_normal_mean = 0.0;
  double half_normal_var = 0.0;
  double gamma_mean = 0.0;
  double gamma_var = 0.0;
};

/// Channel-mean distance map. l1: mean |r - c|; l2: mean (r - c)^2;
/// cosine: 1 - <r, c>/(|r| |c|) over each pixel's channel vector, with a
/// zero-norm vector contributing distance 0. Inputs are {3, H, W}.
FidelityMap compute_fidelity(const Tensor& restored, const Tensor& clean, Metric metric);

/// Mixture moments for the configured degradation levels: the mixture
/// variance is (sum of sigma_i^2) / n^2 over the n levels, halved when
/// restore_halving models the variance reduction of a restoration pass.
/// post_restore_sigma_sq always reports half of the unhalved variance.
NoiseMixtureStats mixture_stats(const std::vector<double>& sigmas, bool restore_halving);

/// Standardizes an unnormalized l1 or l2 map with the model moments for its
/// metric. The per-pixel channel mean of three independent draws keeps the
/// model mean but carries a third of the single-draw variance, so the model
/// standard deviation is divided by sqrt(3) before standardizing.
FidelityMap normalize(const FidelityMap& map, const NoiseMixtureStats& stats);

/// Runs the fidelity estimator head (single-channel, non-residual, clamped
/// output) on a degraded {3, H, W} image. The model is copied internally so
/// concurrent callers can share one loaded instance.
FidelityMap estimate_fidelity(const restore::Denoiser& estimator, const Tensor& degraded);

/// Container kind tag for estimator checkpoints (see restore denoiser I/O).
inline constexpr const char* kEstimatorKind = "fidelity_estimator";

void save_fidelity_map(const FidelityMap& map, const std::string& path);
FidelityMap load_fidelity_map(const std::string& path);

}  // namespace fidcal::fidelity
