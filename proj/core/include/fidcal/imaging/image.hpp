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

#include "fidcal/imaging/resample.hpp"
#include "fidcal/tensor.hpp"

namespace fidcal::imaging {

/// Images are CHW float tensors with values in [0, 1] until normalization.
using Image = Tensor;

inline int channels(const Image& img) {
  FIDCAL_CHECK(img.ndim() == 3, "image: expected CHW tensor, got " + img.shape_str());
  return img.dim(0);
}
inline int height(const Image& img) {
  FIDCAL_CHECK(img.ndim() == 3, "image: expected CHW tensor, got " + img.shape_str());
  return img.dim(1);
}
inline int width(const Image& img) {
  FIDCAL_CHECK(img.ndim() == 3, "image: expected CHW tensor, got " + img.shape_str());
  return img.dim(2);
}

Image make_image(int c, int h, int w, float fill = 0.0f);

/// Separable resize to an exact target size.
Image resize(const Image& img, int out_h, int out_w, Resample mode = Resample::bilinear);

/// Scales so the shorter edge equals `target`; the other edge is rounded to
/// the nearest integer, preserving aspect ratio.
Image resize_shorter_edge(const Image& img, int target, Resample mode = Resample::bilinear);

/// Extracts the [y, y+h) x [x, x+w) window. Throws if it falls outside.
Image crop(const Image& img, int y, int x, int h, int w);

Image center_crop(const Image& img, int out_h, int out_w);

Image hflip(const Image& img);

/// Clamps every value into [0, 1].
Image clip01(Image img);

}  // namespace fidcal::imaging
