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

#include "fidcal/imaging/preprocess.hpp"

#include <cmath>

namespace fidcal::imaging {

CropWindow sample_crop(Rng& rng, const PreprocessConfig& cfg, int img_h, int img_w) {
  FIDCAL_CHECK(img_h > 0 && img_w > 0, "sample_crop: empty image");
  const double src_area = static_cast<double>(img_h) * img_w;
  const double log_lo = std::log(cfg.aspect_lo), log_hi = std::log(cfg.aspect_hi);

  for (int attempt = 0; attempt < cfg.max_crop_attempts; ++attempt) {
    const double target_area = rng.uniform(cfg.area_lo, cfg.area_hi) * src_area;
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const int w = static_cast<int>(std::lround(std::sqrt(target_area * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target_area / aspect)));
    if (w > 0 && h > 0 && w <= img_w && h <= img_h) {
      CropWindow win;
      win.y = rng.uniform_int(img_h - h + 1);
      win.x = rng.uniform_int(img_w - w + 1);
      win.h = h;
      win.w = w;
      return win;
    }
  }

  // No sampled window fit; take the largest centered window whose aspect
  // ratio is clamped into the configured range.
  CropWindow win;
  win.fallback = true;
  const double in_ratio = static_cast<double>(img_w) / img_h;
  if (in_ratio < cfg.aspect_lo) {
    win.w = img_w;
    win.h = static_cast<int>(std::lround(img_w / cfg.aspect_lo));
  } else if (in_ratio > cfg.aspect_hi) {
    win.h = img_h;
    win.w = static_cast<int>(std::lround(img_h * cfg.aspect_hi));
  } else {
    win.h = img_h;
    win.w = img_w;
  }
  win.y = (img_h - win.h) / 2;
  win.x = (img_w - win.w) / 2;
  return win;
}

Image augment_train(const Image& img, const PreprocessConfig& cfg, Rng& rng) {
  FIDCAL_CHECK(channels(img) == 3,
               "augment_train: expected a 3-channel image, got " + img.shape_str());
  const CropWindow win = sample_crop(rng, cfg, height(img), width(img));
  Image out = crop(img, win.y, win.x, win.h, win.w);
  out = resize(out, cfg.crop_size, cfg.crop_size, cfg.resample);
  if (rng.bernoulli(cfg.hflip_prob)) out = hflip(out);
  return out;
}

Image preprocess_eval(const Image& img, const PreprocessConfig& cfg) {
  FIDCAL_CHECK(channels(img) == 3,
               "preprocess_eval: expected a 3-channel image, got " + img.shape_str());
  Image out = resize_shorter_edge(img, cfg.crop_size, cfg.resample);
  return center_crop(out, cfg.crop_size, cfg.crop_size);
}

Image normalize_channels(const Image& img, const PreprocessConfig& cfg) {
  FIDCAL_CHECK(channels(img) == 3,
               "normalize_channels: expected a 3-channel image, got " + img.shape_str());
  Image out = img;
  const int h = height(img), w = width(img);
  for (int c = 0; c < 3; ++c) {
    const float m = cfg.mean[c], inv = 1.0f / cfg.stdev[c];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = (out.at(c, y, x) - m) * inv;
  }
  return out;
}

Image denormalize_channels(const Image& img, const PreprocessConfig& cfg) {
  FIDCAL_CHECK(channels(img) == 3,
               "denormalize_channels: expected a 3-channel image, got " + img.shape_str());
  Image out = img;
  const int h = height(img), w = width(img);
  for (int c = 0; c < 3; ++c) {
    const float m = cfg.mean[c], s = cfg.stdev[c];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = out.at(c, y, x) * s + m;
  }
  return out;
}

}  // namespace fidcal::imaging
