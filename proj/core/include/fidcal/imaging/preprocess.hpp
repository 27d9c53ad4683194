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

#include <array>

#include "fidcal/imaging/image.hpp"
#include "fidcal/rng.hpp"

namespace fidcal::imaging {

/// Geometric and photometric preprocessing parameters.
///
/// Training uses an area/aspect random crop resized to crop_size, then a
/// horizontal flip; evaluation resizes the shorter edge to crop_size and
/// center-crops. Channel normalization is applied after any degradation
/// and restoration, which operate in [0, 1] space.
struct PreprocessConfig {
  int crop_size = 224;
  double area_lo = 0.08;
  double area_hi = 1.0;
  double aspect_lo = 3.0 / 4.0;
  double aspect_hi = 4.0 / 3.0;
  double hflip_prob = 0.5;
  int max_crop_attempts = 10;
  Resample resample = Resample::bilinear;
  std::array<float, 3> mean = {0.485f, 0.456f, 0.406f};
  std::array<float, 3> stdev = {0.229f, 0.224f, 0.225f};
};

struct CropWindow {
  int y = 0, x = 0, h = 0, w = 0;
  bool fallback = false;  // true when no sampled window fit and the
                          // aspect-clamped center window was used instead
};

/// Samples a random crop window. Draw order per attempt is pinned:
/// area fraction, log-aspect, then row offset, then column offset.
CropWindow sample_crop(Rng& rng, const PreprocessConfig& cfg, int img_h, int img_w);

/// Random crop-resize plus horizontal flip; output stays in [0, 1] with
/// shape (3, crop_size, crop_size). Throws on non-3-channel input.
Image augment_train(const Image& img, const PreprocessConfig& cfg, Rng& rng);

/// Deterministic eval-path geometry: shorter edge to crop_size, center crop.
/// Throws on non-3-channel input.
Image preprocess_eval(const Image& img, const PreprocessConfig& cfg);

/// Per-channel affine map x -> (x - mean) / std. Input must have 3 channels.
Image normalize_channels(const Image& img, const PreprocessConfig& cfg);

/// Inverse of normalize_channels.
Image denormalize_channels(const Image& img, const PreprocessConfig& cfg);

}  // namespace fidcal::imaging
