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

#include "fidcal/imaging/image.hpp"
#include "fidcal/nn/init.hpp"
#include "fidcal/nn/layers.hpp"

namespace fidcal::restore {

/// Residual denoising stack: first conv + ReLU, hidden convs (+ optional
/// batch norm) + ReLU, final conv. In residual mode the stack predicts the
/// noise and inference returns clip(input - noise); with residual off the
/// stack output is the prediction itself (the fidelity-estimator head runs
/// that way with a single clamped output channel).
struct DenoiserConfig {
  int depth = 8;
  int width = 64;
  int kernel = 3;
  int in_channels = 3;
  int out_channels = 3;
  bool residual = true;
  bool clamp_nonneg = false;
  bool batchnorm = false;

  void validate() const {
    FIDCAL_CHECK(depth >= 3, "denoiser: depth must be at least 3");
    FIDCAL_CHECK(width > 0 && kernel > 0 && kernel % 2 == 1,
                 "denoiser: width positive and kernel odd required");
    FIDCAL_CHECK(in_channels > 0 && out_channels > 0, "denoiser: channel counts positive");
    FIDCAL_CHECK(!(residual && in_channels != out_channels),
                 "denoiser: residual mode needs matching channel counts");
  }
};

template <typename T>
class DenoiserNet {
 public:
  DenoiserNet() = default;

  explicit DenoiserNet(const DenoiserConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    convs_.emplace_back(cfg.in_channels, cfg.width, cfg.kernel);
    for (int i = 0; i < cfg.depth - 2; ++i) {
      convs_.emplace_back(cfg.width, cfg.width, cfg.kernel);
      if (cfg.batchnorm) bns_.emplace_back(cfg.width);
    }
    convs_.emplace_back(cfg.width, cfg.out_channels, cfg.kernel);
    relus_.resize(convs_.size() - 1);
  }

  const DenoiserConfig& config() const { return cfg_; }

  void init(Rng& rng) {
    for (auto& c : convs_) nn::init_conv_he(c, rng);
  }

  void set_train_mode(bool train) {
    for (auto& bn : bns_) bn.set_train_mode(train);
  }

  void set_trainable(bool trainable) {
    nn::ParamRefs<T> ps;
    collect(ps);
    for (auto* p : ps) p->trainable = trainable;
  }

  void collect(nn::ParamRefs<T>& out) {
    for (auto& c : convs_) c.collect(out);
    for (auto& bn : bns_) bn.collect(out);
  }

  nn::ParamRefs<T> params() {
    nn::ParamRefs<T> ps;
    collect(ps);
    return ps;
  }

  std::vector<nn::Conv2d<T>>& convs() { return convs_; }
  std::vector<nn::BatchNorm2d<T>>& bns() { return bns_; }
  const std::vector<nn::Conv2d<T>>& convs() const { return convs_; }
  const std::vector<nn::BatchNorm2d<T>>& bns() const { return bns_; }

  /// Raw stack output (predicted noise in residual mode). NCHW in/out.
  TensorT<T> forward_raw(const TensorT<T>& x) {
    TensorT<T> h = convs_[0].forward(x);
    h = relus_[0].forward(h);
    for (std::size_t i = 1; i + 1 < convs_.size(); ++i) {
      h = convs_[i].forward(h);
      if (cfg_.batchnorm) h = bns_[i - 1].forward(h);
      h = relus_[i].forward(h);
    }
    h = convs_.back().forward(h);
    if (cfg_.clamp_nonneg) {
      clamp_mask_.assign(h.size(), 1);
      for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] < T(0)) {
          h[i] = T(0);
          clamp_mask_[i] = 0;
        }
    }
    return h;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    TensorT<T> g = gy;
    if (cfg_.clamp_nonneg) {
      FIDCAL_CHECK(g.size() == clamp_mask_.size(), "denoiser: clamp mask mismatch");
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!clamp_mask_[i]) g[i] = T(0);
    }
    g = convs_.back().backward(g);
    for (std::size_t i = convs_.size() - 2; i >= 1; --i) {
      g = relus_[i].backward(g);
      if (cfg_.batchnorm) g = bns_[i - 1].backward(g);
      g = convs_[i].backward(g);
    }
    g = relus_[0].backward(g);
    return convs_[0].backward(g);
  }

  /// Inference: restored batch, clipped to [0, 1].
  TensorT<T> denoise_batch(const TensorT<T>& x) {
    TensorT<T> raw = forward_raw(x);
    FIDCAL_CHECK(cfg_.residual, "denoiser: denoise_batch requires residual mode");
    TensorT<T> out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
      T v = out[i] - raw[i];
      if (v < T(0)) v = T(0);
      if (v > T(1)) v = T(1);
      out[i] = v;
    }
    return out;
  }

  /// Single CHW image convenience wrapper.
  TensorT<T> denoise(const TensorT<T>& img) {
    FIDCAL_CHECK(img.ndim() == 3, "denoise: expected CHW image");
    TensorT<T> batch = img;
    batch.reshape({1, img.dim(0), img.dim(1), img.dim(2)});
    TensorT<T> out = denoise_batch(batch);
    out.reshape({img.dim(0), img.dim(1), img.dim(2)});
    return out;
  }

 private:
  DenoiserConfig cfg_;
  std::vector<nn::Conv2d<T>> convs_;
  std::vector<nn::BatchNorm2d<T>> bns_;
  std::vector<nn::ReLU<T>> relus_;
  std::vector<std::uint8_t> clamp_mask_;
};

using Denoiser = DenoiserNet<float>;

/// Checkpoint I/O (float production weights).
void save_denoiser(const Denoiser& net, const std::string& path,
                   const std::string& kind = "denoiser");
Denoiser load_denoiser(const std::string& path, const std::string& expect_kind = "denoiser");

/// Peak signal-to-noise ratio in dB for [0, peak] images; +inf when equal.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

/// Top-left corners of a patch grid: rows/cols at 0, stride, 2*stride, ...
/// while the patch fits, i.e. floor((H - patch)/stride) + 1 positions per axis.
std::vector<std::pair<int, int>> patch_grid(int h, int w, int patch, int stride);

}  // namespace fidcal::restore
