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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fidcal/imaging/image.hpp"
#include "fidcal/imaging/preprocess.hpp"
#include "fidcal/rng.hpp"

using namespace fidcal;
using namespace fidcal::imaging;

namespace {

Image ramp_image(int c, int h, int w) {
  Image img({c, h, w});
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = static_cast<float>(i) / static_cast<float>(img.size());
  return img;
}

}  // namespace

TEST_CASE("resize to the same size is the identity") {
  const Image img = ramp_image(3, 8, 10);
  for (auto mode : {Resample::bilinear, Resample::bicubic, Resample::nearest}) {
    const Image out = resize(img, 8, 10, mode);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(out[i] == img[i]);
  }
}

TEST_CASE("resize preserves constant images in every mode") {
  Image img = make_image(3, 7, 5, 0.37f);
  for (auto mode : {Resample::bilinear, Resample::bicubic, Resample::nearest}) {
    const Image out = resize(img, 13, 11, mode);
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out[i] == doctest::Approx(0.37f).epsilon(1e-5));
  }
}

TEST_CASE("bilinear upsample matches hand-computed taps") {
  // Width-2 line [0, 1] upsampled to 4 under the half-pixel convention:
  // src(x) = (x + 0.5) / 2 - 0.5 with edge clamping.
  Image img({1, 1, 2});
  img[0] = 0.0f;
  img[1] = 1.0f;
  const Image out = resize(img, 1, 4, Resample::bilinear);
  const float expected[4] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int x = 0; x < 4; ++x) CHECK(out.at(0, 0, x) == doctest::Approx(expected[x]));
}

TEST_CASE("nearest downsample picks the pixel-center source") {
  Image img({1, 1, 4});
  for (int x = 0; x < 4; ++x) img.at(0, 0, x) = static_cast<float>(x) / 3.0f;
  const Image out = resize(img, 1, 2, Resample::nearest);
  CHECK(out.at(0, 0, 0) == doctest::Approx(1.0f / 3.0f));
  CHECK(out.at(0, 0, 1) == doctest::Approx(1.0f));
}

TEST_CASE("shorter-edge resize keeps aspect ratio with rounding") {
  // 448x336 (HxW = 336 rows? use H=336, W=448): shorter edge 336 -> 224
  // scales the longer edge to round(448 * 224 / 336) = 299.
  const Image img = ramp_image(3, 336, 448);
  const Image out = resize_shorter_edge(img, 224);
  const int expect_w = static_cast<int>(std::lround(448.0 * 224.0 / 336.0));
  CHECK(height(out) == 224);
  CHECK(width(out) == expect_w);
  CHECK(expect_w == 299);

  const Image cropped = center_crop(out, 224, 224);
  CHECK(height(cropped) == 224);
  CHECK(width(cropped) == 224);
}

TEST_CASE("crop extracts the exact window and rejects out-of-range") {
  const Image img = ramp_image(1, 6, 6);
  const Image out = crop(img, 2, 3, 2, 2);
  CHECK(out.at(0, 0, 0) == img.at(0, 2, 3));
  CHECK(out.at(0, 1, 1) == img.at(0, 3, 4));
  CHECK_THROWS_AS(crop(img, 5, 5, 3, 3), Error);
  CHECK_THROWS_AS(crop(img, -1, 0, 2, 2), Error);
}

TEST_CASE("hflip is an involution that mirrors columns") {
  const Image img = ramp_image(2, 3, 5);
  const Image flipped = hflip(img);
  CHECK(flipped.at(0, 0, 0) == img.at(0, 0, 4));
  CHECK(flipped.at(1, 2, 1) == img.at(1, 2, 3));
  const Image twice = hflip(flipped);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(twice[i] == img[i]);
}

TEST_CASE("clip01 clamps out-of-range values") {
  Image img({1, 1, 4});
  img[0] = -0.5f;
  img[1] = 0.25f;
  img[2] = 1.5f;
  img[3] = 1.0f;
  const Image out = clip01(img);
  CHECK(out[0] == 0.0f);
  CHECK(out[1] == 0.25f);
  CHECK(out[2] == 1.0f);
  CHECK(out[3] == 1.0f);
}

TEST_CASE("sample_crop windows stay in bounds and replay deterministically") {
  PreprocessConfig cfg;
  cfg.crop_size = 32;
  Rng r1(123), r2(123);
  for (int i = 0; i < 200; ++i) {
    const CropWindow a = sample_crop(r1, cfg, 64, 48);
    const CropWindow b = sample_crop(r2, cfg, 64, 48);
    CHECK(a.y == b.y);
    CHECK(a.x == b.x);
    CHECK(a.h == b.h);
    CHECK(a.w == b.w);
    REQUIRE(a.h > 0);
    REQUIRE(a.w > 0);
    REQUIRE(a.y >= 0);
    REQUIRE(a.x >= 0);
    REQUIRE(a.y + a.h <= 64);
    REQUIRE(a.x + a.w <= 48);
  }
}

TEST_CASE("sample_crop falls back to an aspect-clamped center window") {
  PreprocessConfig cfg;
  cfg.area_lo = 1.0;
  cfg.area_hi = 1.0;
  cfg.aspect_lo = 10.0;
  cfg.aspect_hi = 10.0;
  Rng rng(5);
  const CropWindow win = sample_crop(rng, cfg, 100, 100);
  CHECK(win.fallback);
  CHECK(win.w == 100);
  CHECK(win.h == 10);
  CHECK(win.y == 45);
  CHECK(win.x == 0);
}

TEST_CASE("augment_train emits crop-sized images in range") {
  PreprocessConfig cfg;
  cfg.crop_size = 24;
  const Image img = ramp_image(3, 40, 56);
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    const Image out = augment_train(img, cfg, rng);
    CHECK(out.shape() == std::vector<int>{3, 24, 24});
    for (std::size_t j = 0; j < out.size(); ++j) {
      REQUIRE(out[j] >= -1e-6f);
      REQUIRE(out[j] <= 1.0f + 1e-6f);
    }
  }
}

TEST_CASE("train augmentation replays bit-identically from the same stream") {
  PreprocessConfig cfg;
  cfg.crop_size = 16;
  const Image img = ramp_image(3, 33, 47);
  Rng r1 = Rng::stream(9, {stream_tag::kAugment, 4});
  Rng r2 = Rng::stream(9, {stream_tag::kAugment, 4});
  const Image a = augment_train(img, cfg, r1);
  const Image b = augment_train(img, cfg, r2);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("preprocess_eval is deterministic and rejects non-3-channel input") {
  PreprocessConfig cfg;
  cfg.crop_size = 20;
  const Image img = ramp_image(3, 30, 44);
  const Image a = preprocess_eval(img, cfg);
  const Image b = preprocess_eval(img, cfg);
  CHECK(a.shape() == std::vector<int>{3, 20, 20});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  const Image gray = ramp_image(1, 30, 44);
  Rng rng(1);
  CHECK_THROWS_AS(preprocess_eval(gray, cfg), Error);
  CHECK_THROWS_AS(augment_train(gray, cfg, rng), Error);
}

TEST_CASE("channel normalization applies the pinned affine map") {
  PreprocessConfig cfg;
  Image img = make_image(3, 2, 2, 0.0f);
  img.at(0, 0, 0) = 1.0f;
  img.at(1, 0, 0) = 0.456f;
  img.at(2, 0, 0) = 0.5f;

  const Image out = normalize_channels(img, cfg);
  CHECK(out.at(0, 0, 0) == doctest::Approx((1.0f - 0.485f) / 0.229f));
  CHECK(out.at(1, 0, 0) == doctest::Approx(0.0f).epsilon(1e-5));
  CHECK(out.at(2, 0, 0) == doctest::Approx((0.5f - 0.406f) / 0.225f));
  CHECK(out.at(0, 1, 1) == doctest::Approx(-0.485f / 0.229f));

  const Image back = denormalize_channels(out, cfg);
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(back[i] == doctest::Approx(img[i]).epsilon(1e-5));
}
