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

#include "fidcal/imaging/image.hpp"

#include <algorithm>
#include <cmath>

namespace fidcal::imaging {

Image make_image(int c, int h, int w, float fill) {
  Image img({c, h, w});
  if (fill != 0.0f) img.fill(fill);
  return img;
}

Image resize(const Image& img, int out_h, int out_w, Resample mode) {
  const int c = channels(img), h = height(img), w = width(img);
  FIDCAL_CHECK(out_h > 0 && out_w > 0, "resize: target size must be positive");
  if (out_h == h && out_w == w) return img;

  const auto plan_h = ResamplePlan<float>::make(h, out_h, mode);
  const auto plan_w = ResamplePlan<float>::make(w, out_w, mode);

  // Rows first (H -> out_h at original width), then columns.
  Image mid({c, out_h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int x = 0; x < w; ++x)
      plan_h.apply(&img.at(ch, 0, x), static_cast<std::size_t>(w), &mid.at(ch, 0, x),
                   static_cast<std::size_t>(w));

  Image out({c, out_h, out_w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < out_h; ++y)
      plan_w.apply(&mid.at(ch, y, 0), 1, &out.at(ch, y, 0), 1);
  return out;
}

Image resize_shorter_edge(const Image& img, int target, Resample mode) {
  const int h = height(img), w = width(img);
  FIDCAL_CHECK(target > 0, "resize_shorter_edge: target must be positive");
  int out_h, out_w;
  if (h <= w) {
    out_h = target;
    out_w = static_cast<int>(std::lround(static_cast<double>(w) * target / h));
  } else {
    out_w = target;
    out_h = static_cast<int>(std::lround(static_cast<double>(h) * target / w));
  }
  return resize(img, out_h, out_w, mode);
}

Image crop(const Image& img, int y, int x, int h, int w) {
  const int c = channels(img), ih = height(img), iw = width(img);
  FIDCAL_CHECK(h > 0 && w > 0, "crop: size must be positive");
  FIDCAL_CHECK(y >= 0 && x >= 0 && y + h <= ih && x + w <= iw,
               "crop: window falls outside the image");
  Image out({c, h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int yy = 0; yy < h; ++yy)
      std::copy_n(&img.at(ch, y + yy, x), w, &out.at(ch, yy, 0));
  return out;
}

Image center_crop(const Image& img, int out_h, int out_w) {
  const int ih = height(img), iw = width(img);
  FIDCAL_CHECK(out_h <= ih && out_w <= iw, "center_crop: window larger than image");
  return crop(img, (ih - out_h) / 2, (iw - out_w) / 2, out_h, out_w);
}

Image hflip(const Image& img) {
  const int c = channels(img), h = height(img), w = width(img);
  Image out({c, h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(ch, y, x) = img.at(ch, y, w - 1 - x);
  return out;
}

Image clip01(Image img) {
  for (auto& v : img.values()) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

}  // namespace fidcal::imaging
