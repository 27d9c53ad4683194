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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fidcal/imaging/image.hpp"
#include "fidcal/rng.hpp"

namespace fidcal::degrade {

using imaging::Image;

enum class Kind { awgn, gaussian_blur, motion_blur, salt_pepper, rect_crop };
enum class Variation { uniform, varying_1d, varying_2d };
enum class AnchorMode { anchor_low, anchor_high };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);
std::string to_string(Variation v);
Variation variation_from_string(const std::string& s);

/// Full description of one degradation draw. `level` means sigma for noise
/// and Gaussian blur, replacement probability for salt_pepper, occluded
/// side ratio for rect_crop, and kernel length for motion_blur.
struct DegradationSpec {
  Kind kind = Kind::awgn;
  double level = 0.0;
  Variation variation = Variation::uniform;
  double level_hi = 0.5;
  double level_lo = 0.0;
  AnchorMode anchor_mode = AnchorMode::anchor_low;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-pixel noise standard deviations, plus the sampled geometry that
/// produced them (for sidecar files and reproducibility reports).
struct SigmaField {
  Tensor values;        // shape {H, W}, all entries >= 0
  int axis = -1;        // varying_1d: 0 = varies along rows (y), 1 = along columns (x)
  int anchor_y = -1;    // varying_2d anchor
  int anchor_x = -1;
};

/// Builds the sigma field for a spec. Uniform specs give a constant field;
/// varying_1d ramps linearly (endpoints inclusive) from level_hi at index 0
/// to level_lo at the last index along a seeded random axis; varying_2d is
/// linear in Euclidean distance from a seeded random anchor, level_lo at the
/// anchor scaling to level_hi at the farthest in-image corner (anchor-high
/// swaps the two).
SigmaField sigma_field(const DegradationSpec& spec, int h, int w);

/// Additive white Gaussian noise, independent per channel element, clipped
/// back to [0, 1]. Returns the degraded image and the sigma field used.
std::pair<Image, SigmaField> awgn(const Image& img, const DegradationSpec& spec);

/// 13x13 normalized Gaussian kernel. sigma <= 0 degenerates to a delta.
Tensor gaussian_kernel(double sigma);

/// Normalized 45-degree line kernel with anti-aliased endpoints.
Tensor motion_kernel(int length);

/// Convolution with reflect padding, per channel.
Image conv2d_reflect(const Image& img, const Tensor& kernel);

Image gaussian_blur(const Image& img, double sigma);
Image motion_blur(const Image& img, int length);

/// Each channel element is independently replaced, with probability p,
/// by 0 or 1 with equal odds.
Image salt_pepper(const Image& img, double p, std::uint64_t seed);

/// Occludes (fills with black) a square of side round(ratio * min(H, W))
/// at a seeded random location.
Image rect_crop(const Image& img, double ratio, std::uint64_t seed);

/// Dispatches on spec.kind. For awgn the sigma field is discarded; call
/// awgn() directly when the sidecar is needed.
Image apply(const Image& img, const DegradationSpec& spec);

/// The mixed-degradation sigma levels used by training setups 2/3.
const std::vector<double>& mixture_levels();

/// Uniform draw from mixture_levels().
double draw_mixture_sigma(Rng& rng);

}  // namespace fidcal::degrade
