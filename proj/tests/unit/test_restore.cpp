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
#include <limits>

#include "fidcal/io/hash.hpp"
#include "fidcal/nn/gradcheck.hpp"
#include "fidcal/nn/losses.hpp"
#include "fidcal/nn/optim.hpp"
#include "fidcal/restore/denoiser.hpp"
#include "fidcal/rng.hpp"
#include "test_util.hpp"

using namespace fidcal;
using namespace fidcal::restore;

namespace {

template <typename T>
void randomize(TensorT<T>& t, Rng& rng, double scale = 1.0) {
  for (auto& v : t.values()) v = static_cast<T>(rng.normal() * scale);
}

template <typename T>
TensorT<T> random_batch(const std::vector<int>& shape, std::uint64_t seed, double scale = 1.0) {
  TensorT<T> t(shape);
  Rng rng(seed);
  randomize(t, rng, scale);
  return t;
}

/// Quadratic probe loss: 0.5 * sum((y - target)^2); smooth, so finite
/// differences stay well behaved everywhere except the clamp kink.
template <typename T>
T quadratic_loss(const TensorT<T>& y, const TensorT<T>& target, TensorT<T>* grad = nullptr) {
  T loss = T(0);
  if (grad) *grad = TensorT<T>(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const T d = y[i] - target[i];
    loss += T(0.5) * d * d;
    if (grad) (*grad)[i] = d;
  }
  return loss;
}

}  // namespace

TEST_CASE("denoiser config validation rejects bad shapes") {
  DenoiserConfig good;
  CHECK_NOTHROW(good.validate());

  DenoiserConfig shallow = good;
  shallow.depth = 2;
  CHECK_THROWS_AS(shallow.validate(), Error);

  DenoiserConfig even = good;
  even.kernel = 4;
  CHECK_THROWS_AS(even.validate(), Error);

  DenoiserConfig mismatched = good;
  mismatched.residual = true;
  mismatched.out_channels = 1;
  CHECK_THROWS_AS(mismatched.validate(), Error);

  DenoiserConfig head = good;
  head.residual = false;
  head.out_channels = 1;
  head.clamp_nonneg = true;
  CHECK_NOTHROW(head.validate());
}

TEST_CASE("zero-weight denoiser is the identity on in-range input") {
  DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 4;
  Denoiser net(cfg);  // all weights zero until init() is called

  Tensor x = random_batch<float>({2, 3, 6, 5}, 11, 0.2);
  for (auto& v : x.values()) v = 0.5f + v;  // keep comfortably inside [0, 1]
  for (auto& v : x.values()) v = std::min(std::max(v, 0.05f), 0.95f);

  const Tensor y = net.denoise_batch(x);
  REQUIRE(y.same_shape(x));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("residual denoise subtracts the predicted noise and clips") {
  DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 4;
  Denoiser net(cfg);
  // Zero weights everywhere except a constant bias on the head; the stack
  // then predicts a flat 0.3 noise field on each channel.
  net.convs().back().bias().value.fill(0.3f);

  Tensor x({1, 3, 2, 2});
  const float vals[] = {0.0f, 0.1f, 0.3f, 0.5f, 0.9f, 1.0f, 0.25f, 0.7f, 0.31f, 0.6f, 0.0f, 1.0f};
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = vals[i];

  const Tensor y = net.denoise_batch(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float expect = std::min(std::max(vals[i] - 0.3f, 0.0f), 1.0f);
    CHECK(y[i] == doctest::Approx(expect).epsilon(1e-6));
  }

  Tensor one = x;
  one.reshape({3, 2, 2});
  const Tensor y1 = net.denoise(one);
  REQUIRE(y1.ndim() == 3);
  for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y[i]);
}

TEST_CASE("denoise_batch refuses a non-residual head") {
  DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 4;
  cfg.residual = false;
  cfg.out_channels = 1;
  Denoiser net(cfg);
  Tensor x = random_batch<float>({1, 3, 4, 4}, 3, 0.1);
  CHECK_THROWS_AS(net.denoise_batch(x), Error);
}

TEST_CASE("clamped head zeroes negative outputs and their gradients") {
  DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 2;
  cfg.residual = false;
  cfg.in_channels = 3;
  cfg.out_channels = 1;
  cfg.clamp_nonneg = true;
  Denoiser net(cfg);

  Tensor x = random_batch<float>({1, 3, 4, 4}, 7, 0.3);

  SUBCASE("negative head bias clamps to zero and blocks gradients") {
    net.convs().back().bias().value.fill(-0.7f);
    const Tensor y = net.forward_raw(x);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 0.0f);

    Tensor gy(y.shape());
    gy.fill(1.0f);
    nn::zero_grads(net.params());
    net.backward(gy);
    const auto& gb = net.convs().back().bias().grad;
    for (std::size_t i = 0; i < gb.size(); ++i) CHECK(gb[i] == 0.0f);
  }

  SUBCASE("positive head bias passes through with live gradients") {
    net.convs().back().bias().value.fill(0.4f);
    const Tensor y = net.forward_raw(x);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(0.4f));

    Tensor gy(y.shape());
    gy.fill(1.0f);
    nn::zero_grads(net.params());
    net.backward(gy);
    const auto& gb = net.convs().back().bias().grad;
    CHECK(gb[0] == doctest::Approx(static_cast<float>(y.size())));
  }
}

TEST_CASE("denoiser gradients agree with finite differences") {
  DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 3;
  cfg.in_channels = 2;
  cfg.out_channels = 2;
  DenoiserNet<double> net(cfg);
  Rng rng(42);
  net.init(rng);

  const TensorT<double> x = random_batch<double>({2, 2, 5, 5}, 100, 0.5);
  const TensorT<double> target = random_batch<double>({2, 2, 5, 5}, 101, 0.5);

  auto forward = [&]() {
    TensorT<double> y = net.forward_raw(x);
    return quadratic_loss(y, target);
  };
  auto backward = [&]() {
    TensorT<double> y = net.forward_raw(x);
    TensorT<double> grad;
    quadratic_loss(y, target, &grad);
    nn::zero_grads(net.params());
    net.backward(grad);
  };

  // The probe step can straddle ReLU kinks in a full network, so the
  // whole-stack check runs at the coarse 1e-2 bound; per-layer checks pin
  // much tighter tolerances on smooth regions.
  const auto res = nn::gradcheck<double>(net.params(), forward, backward);
  CAPTURE(res.worst_param);
  CHECK(res.max_rel_err < 1e-2);
}

TEST_CASE("clamped batchnorm head gradients agree with finite differences") {
  DenoiserConfig cfg;
  cfg.depth = 4;
  cfg.width = 3;
  cfg.in_channels = 2;
  cfg.out_channels = 1;
  cfg.residual = false;
  cfg.clamp_nonneg = true;
  cfg.batchnorm = true;
  DenoiserNet<double> net(cfg);
  Rng rng(7);
  net.init(rng);
  net.set_train_mode(true);

  const TensorT<double> x = random_batch<double>({2, 2, 5, 5}, 200, 0.5);
  const TensorT<double> target = random_batch<double>({2, 1, 5, 5}, 201, 0.5);

  auto forward = [&]() {
    TensorT<double> y = net.forward_raw(x);
    return quadratic_loss(y, target);
  };
  auto backward = [&]() {
    TensorT<double> y = net.forward_raw(x);
    TensorT<double> grad;
    quadratic_loss(y, target, &grad);
    nn::zero_grads(net.params());
    net.backward(grad);
  };

  const auto res = nn::gradcheck<double>(net.params(), forward, backward, 1e-4);
  CAPTURE(res.worst_param);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("checkpoint roundtrip preserves weights and outputs") {
  testutil::TempDir tmp;
  DenoiserConfig cfg;
  cfg.depth = 4;
  cfg.width = 5;
  cfg.batchnorm = true;
  Denoiser net(cfg);
  Rng rng(99);
  net.init(rng);

  // Move the running statistics away from their defaults before saving.
  net.set_train_mode(true);
  Tensor warm = random_batch<float>({4, 3, 8, 8}, 55, 0.4);
  net.forward_raw(warm);
  net.set_train_mode(false);

  const std::string path = tmp.file("denoiser.fidc");
  save_denoiser(net, path);

  SUBCASE("weights and config are bit-identical after reload") {
    Denoiser loaded = load_denoiser(path);
    CHECK(loaded.config().depth == cfg.depth);
    CHECK(loaded.config().width == cfg.width);
    CHECK(loaded.config().batchnorm == cfg.batchnorm);
    REQUIRE(loaded.convs().size() == net.convs().size());
    for (std::size_t i = 0; i < net.convs().size(); ++i) {
      const auto& a = net.convs()[i].weight().value;
      const auto& b = loaded.convs()[i].weight().value;
      REQUIRE(a.same_shape(b));
      for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(a[j] == b[j]);
    }
    REQUIRE(loaded.bns().size() == net.bns().size());
    for (std::size_t i = 0; i < net.bns().size(); ++i) {
      const auto& a = net.bns()[i].running_var();
      const auto& b = loaded.bns()[i].running_var();
      for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(a[j] == b[j]);
    }

    loaded.set_train_mode(false);
    Tensor probe = random_batch<float>({2, 3, 6, 6}, 77, 0.3);
    for (auto& v : probe.values()) v = 0.5f + 0.4f * std::tanh(v);
    Tensor ya = net.denoise_batch(probe);
    Tensor yb = loaded.denoise_batch(probe);
    for (std::size_t i = 0; i < ya.size(); ++i) REQUIRE(ya[i] == yb[i]);
  }

  SUBCASE("serialization is byte deterministic") {
    const std::string again = tmp.file("denoiser2.fidc");
    save_denoiser(net, again);
    CHECK(io::sha256_file(path) == io::sha256_file(again));
  }

  SUBCASE("kind mismatch is rejected") {
    CHECK_THROWS_AS(load_denoiser(path, "fidelity_estimator"), Error);
  }
}

TEST_CASE("psnr matches closed forms") {
  Tensor a({1, 2, 2});
  a.fill(0.0f);
  Tensor b = a;
  b.fill(0.5f);
  // MSE 0.25 on a unit peak: 10 log10(1 / 0.25).
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-9));

  Tensor c = a;
  c.fill(5.0f);
  // Constant error 5 with peak 255: 20 log10(255 / 5).
  CHECK(psnr(a, c, 255.0) == doctest::Approx(20.0 * std::log10(51.0)).epsilon(1e-9));

  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());

  Tensor d({1, 2, 3});
  CHECK_THROWS_AS(psnr(a, d), Error);
}

TEST_CASE("patch grid covers the image with the expected corners") {
  const auto grid = patch_grid(100, 100, 50, 25);
  REQUIRE(grid.size() == 9);
  CHECK(grid.front() == std::pair<int, int>(0, 0));
  CHECK(grid.back() == std::pair<int, int>(50, 50));
  for (const auto& [y, x] : grid) {
    CHECK(y + 50 <= 100);
    CHECK(x + 50 <= 100);
  }

  // Non-divisible extent: rows fit at 0/3/6, columns only at 0/3.
  const auto uneven = patch_grid(10, 7, 4, 3);
  REQUIRE(uneven.size() == 6);
  CHECK(uneven.back() == std::pair<int, int>(6, 3));

  CHECK_THROWS_AS(patch_grid(3, 3, 4, 1), Error);
}

TEST_CASE("tiny denoiser overfits a single noisy patch") {
  DenoiserConfig cfg;
  cfg.depth = 3;
  cfg.width = 8;
  Denoiser net(cfg);
  Rng rng(5);
  net.init(rng);

  Tensor clean = random_batch<float>({1, 3, 12, 12}, 500, 0.15);
  for (auto& v : clean.values()) v = 0.5f + v;
  Tensor noise({1, 3, 12, 12});
  Rng nrng(501);
  for (auto& v : noise.values()) v = static_cast<float>(nrng.normal() * 0.1);
  Tensor noisy = clean;
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += noise[i];

  nn::Adam<float> opt(net.params());
  float first = -1.0f, last = -1.0f;
  for (int step = 0; step < 150; ++step) {
    Tensor pred = net.forward_raw(noisy);
    auto loss = nn::l1_loss(pred, noise);
    if (step == 0) first = loss.loss;
    last = loss.loss;
    opt.zero_grad();
    net.backward(loss.grad);
    opt.step(1e-2f);
  }
  CAPTURE(first);
  CAPTURE(last);
  CHECK(last < 0.4f * first);
}
