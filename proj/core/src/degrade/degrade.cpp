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

#include "fidcal/degrade/degrade.hpp"

#include <algorithm>
#include <cmath>

namespace fidcal::degrade {

std::string to_string(Kind k) {
  switch (k) {
    case Kind::awgn: return "awgn";
    case Kind::gaussian_blur: return "gaussian_blur";
    case Kind::motion_blur: return "motion_blur";
    case Kind::salt_pepper: return "salt_pepper";
    case Kind::rect_crop: return "rect_crop";
  }
  return "awgn";
}

Kind kind_from_string(const std::string& s) {
  if (s == "awgn") return Kind::awgn;
  if (s == "gaussian_blur") return Kind::gaussian_blur;
  if (s == "motion_blur") return Kind::motion_blur;
  if (s == "salt_pepper") return Kind::salt_pepper;
  if (s == "rect_crop") return Kind::rect_crop;
  throw Error("unknown degradation kind: " + s);
}

std::string to_string(Variation v) {
  switch (v) {
    case Variation::uniform: return "uniform";
    case Variation::varying_1d: return "varying_1d";
    case Variation::varying_2d: return "varying_2d";
  }
  return "uniform";
}

Variation variation_from_string(const std::string& s) {
  if (s == "uniform") return Variation::uniform;
  if (s == "varying_1d") return Variation::varying_1d;
  if (s == "varying_2d") return Variation::varying_2d;
  throw Error("unknown variation mode: " + s);
}

void DegradationSpec::validate() const {
  FIDCAL_CHECK(level >= 0.0, "degradation: level must be non-negative");
  if (kind == Kind::salt_pepper || kind == Kind::rect_crop)
    FIDCAL_CHECK(level <= 1.0, "degradation: level must be in [0,1] for this kind");
  if (variation != Variation::uniform) {
    FIDCAL_CHECK(kind == Kind::awgn, "degradation: spatial variation is defined for awgn only");
    FIDCAL_CHECK(level_hi >= 0.0 && level_lo >= 0.0,
                 "degradation: varying levels must be non-negative");
  }
}

SigmaField sigma_field(const DegradationSpec& spec, int h, int w) {
  FIDCAL_CHECK(h >= 1 && w >= 1, "sigma_field: size must be at least 1x1");
  spec.validate();

  SigmaField field;
  field.values = Tensor({h, w});

  switch (spec.variation) {
    case Variation::uniform: {
      field.values.fill(static_cast<float>(spec.level));
      break;
    }
    case Variation::varying_1d: {
      Rng rng = Rng::stream(spec.seed, {stream_tag::kDegrade, 1});
      field.axis = rng.uniform_int(2);
      const double hi = spec.level_hi, lo = spec.level_lo;
      auto ramp = [hi, lo](int i, int n) {
        return n == 1 ? hi : hi + (lo - hi) * static_cast<double>(i) / (n - 1);
      };
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double v = field.axis == 0 ? ramp(y, h) : ramp(x, w);
          field.values[static_cast<std::size_t>(y) * w + x] = static_cast<float>(v);
        }
      break;
    }
    case Variation::varying_2d: {
      Rng rng = Rng::stream(spec.seed, {stream_tag::kDegrade, 2});
      field.anchor_y = rng.uniform_int(h);
      field.anchor_x = rng.uniform_int(w);
      double max_d = 0.0;
      for (int cy : {0, h - 1})
        for (int cx : {0, w - 1})
          max_d = std::max(max_d, std::hypot(static_cast<double>(cy - field.anchor_y),
                                             static_cast<double>(cx - field.anchor_x)));
      const double at_anchor =
          spec.anchor_mode == AnchorMode::anchor_low ? spec.level_lo : spec.level_hi;
      const double at_far =
          spec.anchor_mode == AnchorMode::anchor_low ? spec.level_hi : spec.level_lo;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double d = std::hypot(static_cast<double>(y - field.anchor_y),
                                      static_cast<double>(x - field.anchor_x));
          const double t = max_d > 0.0 ? d / max_d : 0.0;
          field.values[static_cast<std::size_t>(y) * w + x] =
              static_cast<float>(at_anchor + (at_far - at_anchor) * t);
        }
      break;
    }
  }
  return field;
}

std::pair<Image, SigmaField> awgn(const Image& img, const DegradationSpec& spec) {
  FIDCAL_CHECK(spec.kind == Kind::awgn, "awgn: spec kind mismatch");
  spec.validate();
  const int c = imaging::channels(img), h = imaging::height(img), w = imaging::width(img);
  SigmaField field = sigma_field(spec, h, w);

  Image out = img;
  Rng rng = Rng::stream(spec.seed, {stream_tag::kDegrade, 0});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const float sigma = field.values[static_cast<std::size_t>(y) * w + x];
        const float noisy = out.at(ch, y, x) + sigma * static_cast<float>(rng.normal());
        out.at(ch, y, x) = std::clamp(noisy, 0.0f, 1.0f);
      }
  return {std::move(out), std::move(field)};
}

Tensor gaussian_kernel(double sigma) {
  constexpr int kSize = 13;
  constexpr int kHalf = kSize / 2;
  Tensor k({kSize, kSize});
  if (sigma <= 0.0) {
    k[static_cast<std::size_t>(kHalf) * kSize + kHalf] = 1.0f;
    return k;
  }
  double sum = 0.0;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) {
      const double dy = y - kHalf, dx = x - kHalf;
      const double v = std::exp(-(dy * dy + dx * dx) * inv);
      k[static_cast<std::size_t>(y) * kSize + x] = static_cast<float>(v);
      sum += v;
    }
  for (auto& v : k.values()) v = static_cast<float>(v / sum);
  return k;
}

Tensor motion_kernel(int length) {
  FIDCAL_CHECK(length >= 1, "motion_kernel: length must be at least 1");
  // The kernel is a 45-degree line through the center. Each diagonal cell at
  // offset u covers [u-0.5, u+0.5] along the line parameter; its weight is
  // the overlap with [-L/2, L/2], which anti-aliases even-length endpoints.
  const int size = (length % 2 == 1) ? length : length + 1;
  const int half = size / 2;
  Tensor k({size, size});
  const double extent = length / 2.0;
  double sum = 0.0;
  for (int u = -half; u <= half; ++u) {
    const double overlap =
        std::max(0.0, std::min(u + 0.5, extent) - std::max(u - 0.5, -extent));
    k[static_cast<std::size_t>(half - u) * size + (half + u)] = static_cast<float>(overlap);
    sum += overlap;
  }
  for (auto& v : k.values()) v = static_cast<float>(v / sum);
  return k;
}

Image conv2d_reflect(const Image& img, const Tensor& kernel) {
  const int c = imaging::channels(img), h = imaging::height(img), w = imaging::width(img);
  FIDCAL_CHECK(kernel.ndim() == 2, "conv2d_reflect: kernel must be 2D");
  const int kh = kernel.dim(0), kw = kernel.dim(1);
  const int oy = kh / 2, ox = kw / 2;

  auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  Image out({c, h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int ky = 0; ky < kh; ++ky) {
          const int sy = reflect(y + ky - oy, h);
          for (int kx = 0; kx < kw; ++kx) {
            const int sx = reflect(x + kx - ox, w);
            acc += static_cast<double>(kernel[static_cast<std::size_t>(ky) * kw + kx]) *
                   img.at(ch, sy, sx);
          }
        }
        out.at(ch, y, x) = static_cast<float>(acc);
      }
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  FIDCAL_CHECK(sigma >= 0.0, "gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0) return img;
  return conv2d_reflect(img, gaussian_kernel(sigma));
}

Image motion_blur(const Image& img, int length) {
  if (length == 1) return img;
  return conv2d_reflect(img, motion_kernel(length));
}

Image salt_pepper(const Image& img, double p, std::uint64_t seed) {
  FIDCAL_CHECK(p >= 0.0 && p <= 1.0, "salt_pepper: probability must be in [0,1]");
  Image out = img;
  Rng rng = Rng::stream(seed, {stream_tag::kDegrade, 3});
  for (auto& v : out.values())
    if (rng.bernoulli(p)) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
  return out;
}

Image rect_crop(const Image& img, double ratio, std::uint64_t seed) {
  FIDCAL_CHECK(ratio >= 0.0 && ratio <= 1.0, "rect_crop: ratio must be in [0,1]");
  const int c = imaging::channels(img), h = imaging::height(img), w = imaging::width(img);
  const int side = static_cast<int>(std::lround(ratio * std::min(h, w)));
  if (side == 0) return img;

  Rng rng = Rng::stream(seed, {stream_tag::kDegrade, 4});
  const int y0 = rng.uniform_int(h - side + 1);
  const int x0 = rng.uniform_int(w - side + 1);
  Image out = img;
  for (int ch = 0; ch < c; ++ch)
    for (int y = y0; y < y0 + side; ++y)
      for (int x = x0; x < x0 + side; ++x) out.at(ch, y, x) = 0.0f;
  return out;
}

Image apply(const Image& img, const DegradationSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case Kind::awgn: return awgn(img, spec).first;
    case Kind::gaussian_blur: return gaussian_blur(img, spec.level);
    case Kind::motion_blur:
      return motion_blur(img, static_cast<int>(std::lround(spec.level)));
    case Kind::salt_pepper: return salt_pepper(img, spec.level, spec.seed);
    case Kind::rect_crop: return rect_crop(img, spec.level, spec.seed);
  }
  throw Error("apply: unhandled degradation kind");
}

const std::vector<double>& mixture_levels() {
  static const std::vector<double> kLevels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  return kLevels;
}

double draw_mixture_sigma(Rng& rng) {
  const auto& levels = mixture_levels();
  return levels[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(levels.size())))];
}

}  // namespace fidcal::degrade
