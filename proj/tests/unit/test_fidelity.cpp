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

#include "fidcal/degrade/degrade.hpp"
#include "fidcal/fidelity/fidelity.hpp"
#include "fidcal/rng.hpp"
#include "test_util.hpp"

using namespace fidcal;
using namespace fidcal::fidelity;

namespace {

Tensor pixel_image(float c0, float c1, float c2) {
  Tensor t({3, 1, 1});
  t[0] = c0;
  t[1] = c1;
  t[2] = c2;
  return t;
}

Tensor random_image(int h, int w, std::uint64_t seed) {
  Tensor t({3, h, w});
  Rng rng(seed);
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform());
  return t;
}

}  // namespace

TEST_CASE("identical images give a zero map under every metric") {
  const Tensor img = random_image(5, 7, 1);
  for (Metric m : {Metric::l1, Metric::l2, Metric::cosine}) {
    const FidelityMap map = compute_fidelity(img, img, m);
    REQUIRE(map.values.ndim() == 3);
    CHECK(map.values.dim(0) == 1);
    CHECK(map.values.dim(1) == 5);
    CHECK(map.values.dim(2) == 7);
    CHECK_FALSE(map.normalized);
    for (float v : map.values.values()) CHECK(v == doctest::Approx(0.0f).epsilon(1e-6));
  }
}

TEST_CASE("single-pixel distances match the channel-mean definition") {
  const Tensor clean = pixel_image(0.2f, 0.4f, 0.6f);
  const Tensor restored = pixel_image(0.3f, 0.4f, 0.5f);

  const FidelityMap l1 = compute_fidelity(restored, clean, Metric::l1);
  CHECK(l1.values[0] == doctest::Approx(0.2 / 3.0).epsilon(1e-6));

  const FidelityMap l2 = compute_fidelity(restored, clean, Metric::l2);
  CHECK(l2.values[0] == doctest::Approx(0.02 / 3.0).epsilon(1e-6));
}

TEST_CASE("cosine distance spans [0, 2] and tolerates zero vectors") {
  CHECK(compute_fidelity(pixel_image(1, 0, 0), pixel_image(0, 1, 0), Metric::cosine).values[0] ==
        doctest::Approx(1.0));
  CHECK(compute_fidelity(pixel_image(1, 0, 0), pixel_image(-1, 0, 0), Metric::cosine).values[0] ==
        doctest::Approx(2.0));
  CHECK(compute_fidelity(pixel_image(2, 4, 6), pixel_image(1, 2, 3), Metric::cosine).values[0] ==
        doctest::Approx(0.0));
  CHECK(compute_fidelity(pixel_image(0, 0, 0), pixel_image(1, 2, 3), Metric::cosine).values[0] ==
        0.0f);
}

TEST_CASE("l1 and l2 maps are symmetric and l1 satisfies the triangle bound") {
  const Tensor a = random_image(6, 6, 10);
  const Tensor b = random_image(6, 6, 11);
  const Tensor c = random_image(6, 6, 12);

  for (Metric m : {Metric::l1, Metric::l2}) {
    const FidelityMap ab = compute_fidelity(a, b, m);
    const FidelityMap ba = compute_fidelity(b, a, m);
    for (std::size_t i = 0; i < ab.values.size(); ++i) CHECK(ab.values[i] == ba.values[i]);
  }

  const FidelityMap ac = compute_fidelity(a, c, Metric::l1);
  const FidelityMap ab = compute_fidelity(a, b, Metric::l1);
  const FidelityMap bc = compute_fidelity(b, c, Metric::l1);
  for (std::size_t i = 0; i < ac.values.size(); ++i)
    CHECK(ac.values[i] <= ab.values[i] + bc.values[i] + 1e-6f);
}

TEST_CASE("compute_fidelity validates shapes") {
  const Tensor a = random_image(4, 4, 2);
  const Tensor b = random_image(4, 5, 3);
  CHECK_THROWS_AS(compute_fidelity(a, b, Metric::l1), Error);
  Tensor two({2, 4, 4});
  CHECK_THROWS_AS(compute_fidelity(two, two, Metric::l1), Error);
}

TEST_CASE("mixture statistics follow the additive-mixture variance model") {
  const std::vector<double> levels = degrade::mixture_levels();
  REQUIRE(levels.size() == 6);

  SUBCASE("unhalved variance") {
    const NoiseMixtureStats s = mixture_stats(levels, false);
    CHECK(s.sigma_sq == doctest::Approx(0.55 / 36.0).epsilon(1e-12));
    CHECK(s.post_restore_sigma_sq == doctest::Approx(0.55 / 72.0).epsilon(1e-12));
    CHECK(s.gamma_mean == doctest::Approx(s.sigma_sq).epsilon(1e-12));
    CHECK(s.gamma_var == doctest::Approx(s.sigma_sq * std::sqrt(2.0)).epsilon(1e-12));
  }

  SUBCASE("restoration halving") {
    const NoiseMixtureStats s = mixture_stats(levels, true);
    CHECK(s.sigma_sq == doctest::Approx(0.55 / 72.0).epsilon(1e-12));
    CHECK(s.sigma_sq == doctest::Approx(0.0076389).epsilon(1e-4));
    CHECK(std::sqrt(s.sigma_sq) == doctest::Approx(0.08740).epsilon(1e-4));
    CHECK(s.half_normal_mean == doctest::Approx(0.06974).epsilon(1e-4));
    CHECK(s.half_normal_mean ==
          doctest::Approx(std::sqrt(s.sigma_sq) * std::sqrt(2.0 / M_PI)).epsilon(1e-12));
    CHECK(s.half_normal_var ==
          doctest::Approx(s.sigma_sq * (1.0 - 2.0 / M_PI)).epsilon(1e-12));
    CHECK(s.post_restore_sigma_sq == doctest::Approx(0.55 / 72.0).epsilon(1e-12));
  }

  SUBCASE("degenerate and invalid sets") {
    const NoiseMixtureStats z = mixture_stats({0.0}, false);
    CHECK(z.sigma_sq == 0.0);
    CHECK(z.half_normal_mean == 0.0);
    CHECK(z.half_normal_var == 0.0);
    CHECK(z.gamma_var == 0.0);
    CHECK_THROWS_AS(mixture_stats({}, false), Error);
  }
}

TEST_CASE("normalize centers by the model mean and scales by the corrected std") {
  const NoiseMixtureStats stats = mixture_stats(degrade::mixture_levels(), true);

  SUBCASE("constant map at the half-normal mean maps to zero") {
    FidelityMap map;
    map.metric = Metric::l1;
    map.values = Tensor({1, 3, 3});
    map.values.fill(static_cast<float>(stats.half_normal_mean));
    const FidelityMap out = normalize(map, stats);
    CHECK(out.normalized);
    for (float v : out.values.values()) CHECK(v == doctest::Approx(0.0f).epsilon(1e-5));
  }

  SUBCASE("one corrected standard deviation above the mean maps to one") {
    const double std_l1 = std::sqrt(stats.half_normal_var / 3.0);
    FidelityMap map;
    map.metric = Metric::l1;
    map.values = Tensor({1, 1, 1});
    map.values[0] = static_cast<float>(stats.half_normal_mean + std_l1);
    const FidelityMap out = normalize(map, stats);
    CHECK(out.values[0] == doctest::Approx(1.0f).epsilon(1e-5));
    CHECK(out.norm_mean == doctest::Approx(stats.half_normal_mean));
    CHECK(out.norm_std == doctest::Approx(std_l1));
  }

  SUBCASE("l2 maps use the Gamma moments") {
    const double std_l2 = std::sqrt(stats.gamma_var / 3.0);
    FidelityMap map;
    map.metric = Metric::l2;
    map.values = Tensor({1, 1, 2});
    map.values[0] = static_cast<float>(stats.gamma_mean);
    map.values[1] = static_cast<float>(stats.gamma_mean + 2.0 * std_l2);
    const FidelityMap out = normalize(map, stats);
    CHECK(out.values[0] == doctest::Approx(0.0f).epsilon(1e-5));
    CHECK(out.values[1] == doctest::Approx(2.0f).epsilon(1e-4));
  }

  SUBCASE("the transform is affine with the recorded constants") {
    FidelityMap map;
    map.metric = Metric::l1;
    map.values = Tensor({1, 4, 4});
    Rng rng(33);
    for (auto& v : map.values.values()) v = static_cast<float>(rng.uniform() * 0.2);
    const FidelityMap out = normalize(map, stats);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      const double back = static_cast<double>(out.values[i]) * out.norm_std + out.norm_mean;
      CHECK(back == doctest::Approx(static_cast<double>(map.values[i])).epsilon(1e-5));
    }
  }

  SUBCASE("cosine maps and double normalization are rejected") {
    FidelityMap cosine;
    cosine.metric = Metric::cosine;
    cosine.values = Tensor({1, 2, 2});
    CHECK_THROWS_AS(normalize(cosine, stats), Error);

    FidelityMap map;
    map.metric = Metric::l1;
    map.values = Tensor({1, 2, 2});
    const FidelityMap once = normalize(map, stats);
    CHECK_THROWS_AS(normalize(once, stats), Error);

    const NoiseMixtureStats degenerate = mixture_stats({0.0}, false);
    CHECK_THROWS_AS(normalize(map, degenerate), Error);
  }
}

TEST_CASE("normalized model-matched noise pools to zero mean and unit spread") {
  // Monte-Carlo draw from the exact model the constants assume: per pixel,
  // three independent Gaussian channel draws at the post-restoration sigma,
  // reduced by channel mean. The l1 pool must standardize to (0, 1); the l2
  // pool must center at zero.
  const NoiseMixtureStats stats = mixture_stats(degrade::mixture_levels(), true);
  const double sigma = std::sqrt(stats.post_restore_sigma_sq);
  const int n = 80, h = 64, w = 64;

  Rng rng(2024);
  double l1_sum = 0.0, l1_sq = 0.0, l2_sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < n; ++i) {
    FidelityMap m1, m2;
    m1.metric = Metric::l1;
    m2.metric = Metric::l2;
    m1.values = Tensor({1, h, w});
    m2.values = Tensor({1, h, w});
    for (int p = 0; p < h * w; ++p) {
      double a1 = 0.0, a2 = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = rng.normal() * sigma;
        a1 += std::fabs(d);
        a2 += d * d;
      }
      m1.values[p] = static_cast<float>(a1 / 3.0);
      m2.values[p] = static_cast<float>(a2 / 3.0);
    }
    const FidelityMap n1 = normalize(m1, stats);
    const FidelityMap n2 = normalize(m2, stats);
    for (int p = 0; p < h * w; ++p) {
      l1_sum += n1.values[p];
      l1_sq += static_cast<double>(n1.values[p]) * n1.values[p];
      l2_sum += n2.values[p];
      ++count;
    }
  }
  const double l1_mean = l1_sum / count;
  const double l1_std = std::sqrt(l1_sq / count - l1_mean * l1_mean);
  CHECK(std::fabs(l1_mean) < 0.02);
  CHECK(l1_std == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::fabs(l2_sum / count) < 0.02);
}

TEST_CASE("estimator inference yields a clamped single-channel map") {
  restore::DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 4;
  cfg.out_channels = 1;
  cfg.residual = false;
  cfg.clamp_nonneg = true;
  restore::Denoiser est(cfg);
  Rng rng(8);
  est.init(rng);

  const Tensor degraded = random_image(10, 12, 40);
  const FidelityMap map = estimate_fidelity(est, degraded);
  CHECK(map.metric == Metric::l1);
  CHECK_FALSE(map.normalized);
  REQUIRE(map.values.ndim() == 3);
  CHECK(map.values.dim(0) == 1);
  CHECK(map.values.dim(1) == 10);
  CHECK(map.values.dim(2) == 12);
  for (float v : map.values.values()) CHECK(v >= 0.0f);

  // The shared instance must be left untouched by inference.
  const FidelityMap again = estimate_fidelity(est, degraded);
  for (std::size_t i = 0; i < map.values.size(); ++i) CHECK(map.values[i] == again.values[i]);
}

TEST_CASE("estimator misuse is rejected") {
  restore::DenoiserConfig wrong;
  wrong.depth = 3;
  wrong.width = 4;
  restore::Denoiser residual_net(wrong);
  Rng rng(9);
  residual_net.init(rng);
  const Tensor degraded = random_image(6, 6, 41);
  CHECK_THROWS_AS(estimate_fidelity(residual_net, degraded), Error);

  restore::DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 4;
  cfg.out_channels = 1;
  cfg.residual = false;
  cfg.clamp_nonneg = true;
  restore::Denoiser untrained(cfg);
  CHECK_THROWS_AS(estimate_fidelity(untrained, degraded), Error);
}

TEST_CASE("fidelity maps survive a save and reload") {
  testutil::TempDir tmp;
  const NoiseMixtureStats stats = mixture_stats(degrade::mixture_levels(), true);
  FidelityMap map;
  map.metric = Metric::l1;
  map.values = Tensor({1, 4, 5});
  Rng rng(77);
  for (auto& v : map.values.values()) v = static_cast<float>(rng.uniform() * 0.3);
  const FidelityMap normalized = normalize(map, stats);

  const std::string path = tmp.file("map.fidc");
  save_fidelity_map(normalized, path);
  const FidelityMap loaded = load_fidelity_map(path);
  CHECK(loaded.metric == Metric::l1);
  CHECK(loaded.normalized);
  CHECK(loaded.norm_mean == doctest::Approx(normalized.norm_mean).epsilon(1e-12));
  CHECK(loaded.norm_std == doctest::Approx(normalized.norm_std).epsilon(1e-12));
  REQUIRE(loaded.values.same_shape(normalized.values));
  for (std::size_t i = 0; i < loaded.values.size(); ++i)
    CHECK(loaded.values[i] == normalized.values[i]);

  restore::DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 4;
  restore::Denoiser net(cfg);
  const std::string other = tmp.file("not_a_map.fidc");
  restore::save_denoiser(net, other);
  CHECK_THROWS_AS(load_fidelity_map(other), Error);
}
