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

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fidcal/imaging/resample.hpp"
#include "fidcal/tensor.hpp"

namespace fidcal::nn {

using imaging::Resample;

/// Trainable value plus its accumulated gradient. Layers hand out pointers
/// via collect(); optimizers update every trainable param in place.
template <typename T>
struct Param {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;
  bool trainable = true;

  void init_shape(std::string n, std::vector<int> shape) {
    name = std::move(n);
    value = TensorT<T>(shape);
    grad = TensorT<T>(std::move(shape));
  }
  void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
using ParamRefs = std::vector<Param<T>*>;

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatT<T>>;
template <typename T>
using CMapM = Eigen::Map<const MatT<T>>;

// ---------------------------------------------------------------------------
// Convolution (stride 1, zero padding), backed by im2col + GEMM.
// ---------------------------------------------------------------------------

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int kernel, int pad = -1)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), pad_(pad < 0 ? kernel / 2 : pad) {
    FIDCAL_CHECK(in_ch > 0 && out_ch > 0 && kernel > 0, "conv2d: bad dimensions");
    w_.init_shape("w", {out_ch_, in_ch_ * k_ * k_});
    b_.init_shape("b", {out_ch_});
  }

  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int kernel() const { return k_; }
  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }
  const Param<T>& weight() const { return w_; }
  const Param<T>& bias() const { return b_; }

  void collect(ParamRefs<T>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

  TensorT<T> forward(const TensorT<T>& x) {
    FIDCAL_CHECK(x.ndim() == 4 && x.dim(1) == in_ch_,
                 "conv2d: expected NCHW input with " + std::to_string(in_ch_) + " channels");
    x_cache_ = x;
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int oh = h + 2 * pad_ - k_ + 1, ow = w + 2 * pad_ - k_ + 1;
    FIDCAL_CHECK(oh > 0 && ow > 0, "conv2d: input smaller than kernel");

    TensorT<T> y({n, out_ch_, oh, ow});
    col_.assign(static_cast<std::size_t>(in_ch_ * k_ * k_) * oh * ow, T(0));
    for (int i = 0; i < n; ++i) {
      im2col(x, i, h, w, oh, ow);
      CMapM<T> wm(w_.value.data(), out_ch_, in_ch_ * k_ * k_);
      CMapM<T> cm(col_.data(), in_ch_ * k_ * k_, oh * ow);
      MapM<T> ym(&y.at(i, 0, 0, 0), out_ch_, oh * ow);
      ym.noalias() = wm * cm;
      for (int oc = 0; oc < out_ch_; ++oc) ym.row(oc).array() += b_.value[oc];
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    const TensorT<T>& x = x_cache_;
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int oh = gy.dim(2), ow = gy.dim(3);
    FIDCAL_CHECK(gy.dim(0) == n && gy.dim(1) == out_ch_, "conv2d: gradient shape mismatch");

    TensorT<T> gx(x.shape());
    std::vector<T> gcol(static_cast<std::size_t>(in_ch_ * k_ * k_) * oh * ow);
    for (int i = 0; i < n; ++i) {
      im2col(x, i, h, w, oh, ow);
      CMapM<T> gym(&gy.at(i, 0, 0, 0), out_ch_, oh * ow);
      CMapM<T> cm(col_.data(), in_ch_ * k_ * k_, oh * ow);
      MapM<T> gwm(w_.grad.data(), out_ch_, in_ch_ * k_ * k_);
      gwm.noalias() += gym * cm.transpose();
      // Fixed-order accumulation: Eigen's vectorized sum() splits work by
      // pointer alignment, making the result depend on the heap address.
      for (int oc = 0; oc < out_ch_; ++oc) {
        const T* row = &gy.at(i, oc, 0, 0);
        T acc = T(0);
        for (int p = 0; p < oh * ow; ++p) acc += row[p];
        b_.grad[oc] += acc;
      }

      CMapM<T> wm(w_.value.data(), out_ch_, in_ch_ * k_ * k_);
      MapM<T> gcm(gcol.data(), in_ch_ * k_ * k_, oh * ow);
      gcm.noalias() = wm.transpose() * gym;
      col2im(gcol, gx, i, h, w, oh, ow);
    }
    return gx;
  }

 private:
  void im2col(const TensorT<T>& x, int img, int h, int w, int oh, int ow) {
    const std::size_t plane = static_cast<std::size_t>(oh) * ow;
    for (int c = 0; c < in_ch_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          T* dst = col_.data() + (static_cast<std::size_t>(c) * k_ * k_ + ky * k_ + kx) * plane;
          for (int y = 0; y < oh; ++y) {
            const int sy = y + ky - pad_;
            if (sy < 0 || sy >= h) {
              std::fill_n(dst + static_cast<std::size_t>(y) * ow, ow, T(0));
              continue;
            }
            for (int xx = 0; xx < ow; ++xx) {
              const int sx = xx + kx - pad_;
              dst[static_cast<std::size_t>(y) * ow + xx] =
                  (sx < 0 || sx >= w) ? T(0) : x.at(img, c, sy, sx);
            }
          }
        }
  }

  void col2im(const std::vector<T>& gcol, TensorT<T>& gx, int img, int h, int w, int oh,
              int ow) {
    const std::size_t plane = static_cast<std::size_t>(oh) * ow;
    for (int c = 0; c < in_ch_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          const T* src =
              gcol.data() + (static_cast<std::size_t>(c) * k_ * k_ + ky * k_ + kx) * plane;
          for (int y = 0; y < oh; ++y) {
            const int sy = y + ky - pad_;
            if (sy < 0 || sy >= h) continue;
            for (int xx = 0; xx < ow; ++xx) {
              const int sx = xx + kx - pad_;
              if (sx >= 0 && sx < w)
                gx.at(img, c, sy, sx) += src[static_cast<std::size_t>(y) * ow + xx];
            }
          }
        }
  }

  int in_ch_ = 0, out_ch_ = 0, k_ = 0, pad_ = 0;
  Param<T> w_, b_;
  TensorT<T> x_cache_;
  std::vector<T> col_;
};

// ---------------------------------------------------------------------------
// Elementwise and pooling layers.
// ---------------------------------------------------------------------------

template <typename T>
class ReLU {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    mask_.assign(x.size(), 0);
    TensorT<T> y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] > T(0))
        mask_[i] = 1;
      else
        y[i] = T(0);
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    FIDCAL_CHECK(gy.size() == mask_.size(), "relu: gradient shape mismatch");
    TensorT<T> gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (!mask_[i]) gx[i] = T(0);
    return gx;
  }

 private:
  std::vector<std::uint8_t> mask_;
};

template <typename T>
class Sigmoid {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    y_cache_ = x;
    for (auto& v : y_cache_.values()) v = T(1) / (T(1) + std::exp(-v));
    return y_cache_;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    TensorT<T> gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      gx[i] *= y_cache_[i] * (T(1) - y_cache_[i]);
    return gx;
  }

 private:
  TensorT<T> y_cache_;
};

/// 2x2 max pooling with stride 2 (floor semantics for odd sizes).
template <typename T>
class MaxPool2d {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    FIDCAL_CHECK(x.ndim() == 4, "maxpool: expected NCHW input");
    in_shape_ = x.shape();
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int oh = h / 2, ow = w / 2;
    FIDCAL_CHECK(oh > 0 && ow > 0, "maxpool: input too small");

    TensorT<T> y({n, c, oh, ow});
    arg_.resize(y.size());
    std::size_t o = 0;
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int y0 = 0; y0 < oh; ++y0)
          for (int x0 = 0; x0 < ow; ++x0, ++o) {
            T best = x.at(i, ch, 2 * y0, 2 * x0);
            std::size_t besti =
                ((static_cast<std::size_t>(i) * c + ch) * h + 2 * y0) * w + 2 * x0;
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const T v = x.at(i, ch, 2 * y0 + dy, 2 * x0 + dx);
                if (v > best) {
                  best = v;
                  besti = ((static_cast<std::size_t>(i) * c + ch) * h + 2 * y0 + dy) * w +
                          2 * x0 + dx;
                }
              }
            y[o] = best;
            arg_[o] = besti;
          }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    FIDCAL_CHECK(gy.size() == arg_.size(), "maxpool: gradient shape mismatch");
    TensorT<T> gx(in_shape_);
    for (std::size_t o = 0; o < gy.size(); ++o) gx[arg_[o]] += gy[o];
    return gx;
  }

 private:
  std::vector<int> in_shape_;
  std::vector<std::size_t> arg_;
};

/// NCHW -> NC global average pooling.
template <typename T>
class GlobalAvgPool {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    FIDCAL_CHECK(x.ndim() == 4, "gap: expected NCHW input");
    in_shape_ = x.shape();
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    TensorT<T> y({n, c});
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch) {
        const T* p = &x.at(i, ch, 0, 0);
        T acc = T(0);
        for (std::size_t j = 0; j < hw; ++j) acc += p[j];
        y[static_cast<std::size_t>(i) * c + ch] = acc / static_cast<T>(hw);
      }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    const int n = in_shape_[0], c = in_shape_[1];
    const std::size_t hw = static_cast<std::size_t>(in_shape_[2]) * in_shape_[3];
    TensorT<T> gx(in_shape_);
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch) {
        const T g = gy[static_cast<std::size_t>(i) * c + ch] / static_cast<T>(hw);
        T* p = &gx.at(i, ch, 0, 0);
        for (std::size_t j = 0; j < hw; ++j) p[j] = g;
      }
    return gx;
  }

 private:
  std::vector<int> in_shape_;
};

// ---------------------------------------------------------------------------
// Fully connected layer on {N, in} matrices.
// ---------------------------------------------------------------------------

template <typename T>
class Dense {
 public:
  Dense() = default;
  Dense(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
    FIDCAL_CHECK(in_dim > 0 && out_dim > 0, "dense: bad dimensions");
    w_.init_shape("w", {out_, in_});
    b_.init_shape("b", {out_});
  }

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }
  const Param<T>& weight() const { return w_; }
  const Param<T>& bias() const { return b_; }

  void collect(ParamRefs<T>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

  TensorT<T> forward(const TensorT<T>& x) {
    FIDCAL_CHECK(x.ndim() == 2 && x.dim(1) == in_, "dense: expected {N, in} input");
    x_cache_ = x;
    const int n = x.dim(0);
    TensorT<T> y({n, out_});
    CMapM<T> xm(x.data(), n, in_);
    CMapM<T> wm(w_.value.data(), out_, in_);
    MapM<T> ym(y.data(), n, out_);
    ym.noalias() = xm * wm.transpose();
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_; ++o) y[static_cast<std::size_t>(i) * out_ + o] += b_.value[o];
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    const int n = x_cache_.dim(0);
    FIDCAL_CHECK(gy.ndim() == 2 && gy.dim(0) == n && gy.dim(1) == out_,
                 "dense: gradient shape mismatch");
    CMapM<T> gym(gy.data(), n, out_);
    CMapM<T> xm(x_cache_.data(), n, in_);
    MapM<T> gwm(w_.grad.data(), out_, in_);
    gwm.noalias() += gym.transpose() * xm;
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_; ++o) b_.grad[o] += gy[static_cast<std::size_t>(i) * out_ + o];

    TensorT<T> gx({n, in_});
    CMapM<T> wm(w_.value.data(), out_, in_);
    MapM<T> gxm(gx.data(), n, in_);
    gxm.noalias() = gym * wm;
    return gx;
  }

 private:
  int in_ = 0, out_ = 0;
  Param<T> w_, b_;
  TensorT<T> x_cache_;
};

// ---------------------------------------------------------------------------
// Batch normalization over NCHW (per-channel statistics).
// ---------------------------------------------------------------------------

template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, T eps = T(1e-5), T momentum = T(0.1))
      : c_(channels), eps_(eps), momentum_(momentum) {
    gamma_.init_shape("gamma", {c_});
    beta_.init_shape("beta", {c_});
    gamma_.value.fill(T(1));
    running_mean_ = TensorT<T>({c_});
    running_var_ = TensorT<T>({c_});
    running_var_.fill(T(1));
  }

  int channels() const { return c_; }
  void set_train_mode(bool train) { train_ = train; }
  bool train_mode() const { return train_; }
  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  TensorT<T>& running_mean() { return running_mean_; }
  TensorT<T>& running_var() { return running_var_; }
  const Param<T>& gamma() const { return gamma_; }
  const Param<T>& beta() const { return beta_; }
  const TensorT<T>& running_mean() const { return running_mean_; }
  const TensorT<T>& running_var() const { return running_var_; }

  void collect(ParamRefs<T>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  TensorT<T> forward(const TensorT<T>& x) {
    FIDCAL_CHECK(x.ndim() == 4 && x.dim(1) == c_, "batchnorm: expected NCHW with matching C");
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t per_c = static_cast<std::size_t>(n) * h * w;

    TensorT<T> y(x.shape());
    xhat_ = TensorT<T>(x.shape());
    istd_ = TensorT<T>({c_});

    for (int ch = 0; ch < c_; ++ch) {
      T mean, var;
      if (train_) {
        T sum = T(0), sq = T(0);
        for (int i = 0; i < n; ++i) {
          const T* p = &x.at(i, ch, 0, 0);
          for (std::size_t j = 0; j < static_cast<std::size_t>(h) * w; ++j) {
            sum += p[j];
            sq += p[j] * p[j];
          }
        }
        mean = sum / static_cast<T>(per_c);
        var = sq / static_cast<T>(per_c) - mean * mean;
        if (var < T(0)) var = T(0);
        const T unbiased = per_c > 1 ? var * static_cast<T>(per_c) / static_cast<T>(per_c - 1)
                                     : var;
        running_mean_[ch] = (T(1) - momentum_) * running_mean_[ch] + momentum_ * mean;
        running_var_[ch] = (T(1) - momentum_) * running_var_[ch] + momentum_ * unbiased;
      } else {
        mean = running_mean_[ch];
        var = running_var_[ch];
      }
      const T istd = T(1) / std::sqrt(var + eps_);
      istd_[ch] = istd;
      for (int i = 0; i < n; ++i) {
        const T* p = &x.at(i, ch, 0, 0);
        T* xh = &xhat_.at(i, ch, 0, 0);
        T* yo = &y.at(i, ch, 0, 0);
        for (std::size_t j = 0; j < static_cast<std::size_t>(h) * w; ++j) {
          xh[j] = (p[j] - mean) * istd;
          yo[j] = gamma_.value[ch] * xh[j] + beta_.value[ch];
        }
      }
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    FIDCAL_CHECK(gy.same_shape(xhat_), "batchnorm: gradient shape mismatch");
    const int n = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
    const std::size_t per_c = static_cast<std::size_t>(n) * h * w;
    TensorT<T> gx(gy.shape());

    for (int ch = 0; ch < c_; ++ch) {
      T gsum = T(0), gxhat_dot = T(0);
      for (int i = 0; i < n; ++i) {
        const T* g = &gy.at(i, ch, 0, 0);
        const T* xh = &xhat_.at(i, ch, 0, 0);
        for (std::size_t j = 0; j < static_cast<std::size_t>(h) * w; ++j) {
          gsum += g[j];
          gxhat_dot += g[j] * xh[j];
        }
      }
      gamma_.grad[ch] += gxhat_dot;
      beta_.grad[ch] += gsum;

      const T scale = gamma_.value[ch] * istd_[ch];
      for (int i = 0; i < n; ++i) {
        const T* g = &gy.at(i, ch, 0, 0);
        const T* xh = &xhat_.at(i, ch, 0, 0);
        T* gxo = &gx.at(i, ch, 0, 0);
        for (std::size_t j = 0; j < static_cast<std::size_t>(h) * w; ++j) {
          if (train_) {
            gxo[j] = scale * (g[j] - gsum / static_cast<T>(per_c) -
                              xh[j] * gxhat_dot / static_cast<T>(per_c));
          } else {
            gxo[j] = scale * g[j];
          }
        }
      }
    }
    return gx;
  }

 private:
  int c_ = 0;
  T eps_ = T(1e-5), momentum_ = T(0.1);
  bool train_ = true;
  Param<T> gamma_, beta_;
  TensorT<T> running_mean_, running_var_;
  TensorT<T> xhat_, istd_;
};

// ---------------------------------------------------------------------------
// Differentiable resampling of NCHW maps and {N, L} vectors.
// ---------------------------------------------------------------------------

template <typename T>
class Resample2d {
 public:
  explicit Resample2d(Resample mode = Resample::bilinear) : mode_(mode) {}

  Resample mode() const { return mode_; }
  void set_mode(Resample mode) {
    mode_ = mode;
    plan_h_ = imaging::ResamplePlan<T>{};
    plan_w_ = imaging::ResamplePlan<T>{};
  }

  TensorT<T> forward(const TensorT<T>& x, int out_h, int out_w) {
    FIDCAL_CHECK(x.ndim() == 4, "resample2d: expected NCHW input");
    in_shape_ = x.shape();
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h == out_h && w == out_w) {
      identity_ = true;
      return x;
    }
    identity_ = false;
    ensure_plans(h, w, out_h, out_w);

    TensorT<T> mid({n, c, out_h, w});
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int x0 = 0; x0 < w; ++x0)
          plan_h_.apply(&x.at(i, ch, 0, x0), static_cast<std::size_t>(w),
                        &mid.at(i, ch, 0, x0), static_cast<std::size_t>(w));
    TensorT<T> y({n, c, out_h, out_w});
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int y0 = 0; y0 < out_h; ++y0)
          plan_w_.apply(&mid.at(i, ch, y0, 0), 1, &y.at(i, ch, y0, 0), 1);
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    if (identity_) return gy;
    const int n = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
    const int oh = gy.dim(2), ow = gy.dim(3);

    TensorT<T> gmid({n, c, oh, w});
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int y0 = 0; y0 < oh; ++y0)
          plan_w_.apply_transposed(&gy.at(i, ch, y0, 0), 1, &gmid.at(i, ch, y0, 0), 1);
    TensorT<T> gx(in_shape_);
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int x0 = 0; x0 < w; ++x0)
          plan_h_.apply_transposed(&gmid.at(i, ch, 0, x0), static_cast<std::size_t>(w),
                                   &gx.at(i, ch, 0, x0), static_cast<std::size_t>(w));
    return gx;
  }

 private:
  void ensure_plans(int h, int w, int oh, int ow) {
    if (plan_h_.in_len != h || plan_h_.out_len != oh)
      plan_h_ = imaging::ResamplePlan<T>::make(h, oh, mode_);
    if (plan_w_.in_len != w || plan_w_.out_len != ow)
      plan_w_ = imaging::ResamplePlan<T>::make(w, ow, mode_);
  }

  Resample mode_;
  imaging::ResamplePlan<T> plan_h_, plan_w_;
  std::vector<int> in_shape_;
  bool identity_ = false;
};

template <typename T>
class Resample1d {
 public:
  explicit Resample1d(Resample mode = Resample::bilinear) : mode_(mode) {}

  void set_mode(Resample mode) {
    mode_ = mode;
    plan_ = imaging::ResamplePlan<T>{};
  }

  TensorT<T> forward(const TensorT<T>& x, int out_len) {
    FIDCAL_CHECK(x.ndim() == 2, "resample1d: expected {N, L} input");
    in_shape_ = x.shape();
    const int n = x.dim(0), l = x.dim(1);
    if (l == out_len) {
      identity_ = true;
      return x;
    }
    identity_ = false;
    if (plan_.in_len != l || plan_.out_len != out_len)
      plan_ = imaging::ResamplePlan<T>::make(l, out_len, mode_);
    TensorT<T> y({n, out_len});
    for (int i = 0; i < n; ++i)
      plan_.apply(x.data() + static_cast<std::size_t>(i) * l, 1,
                  y.data() + static_cast<std::size_t>(i) * out_len, 1);
    return y;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    if (identity_) return gy;
    const int n = in_shape_[0], l = in_shape_[1];
    const int ol = gy.dim(1);
    TensorT<T> gx(in_shape_);
    for (int i = 0; i < n; ++i)
      plan_.apply_transposed(gy.data() + static_cast<std::size_t>(i) * ol, 1,
                             gx.data() + static_cast<std::size_t>(i) * l, 1);
    return gx;
  }

 private:
  Resample mode_;
  imaging::ResamplePlan<T> plan_;
  std::vector<int> in_shape_;
  bool identity_ = false;
};

/// Swaps H and W of an NCHW tensor (used to build the transposed-map half of
/// the channel feature vector). Its backward is the same transpose.
template <typename T>
class TransposeHW {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    FIDCAL_CHECK(x.ndim() == 4, "transpose_hw: expected NCHW input");
    return apply(x);
  }
  TensorT<T> backward(const TensorT<T>& gy) { return apply(gy); }

 private:
  static TensorT<T> apply(const TensorT<T>& x) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    TensorT<T> y({n, c, w, h});
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int yy = 0; yy < h; ++yy)
          for (int xx = 0; xx < w; ++xx) y.at(i, ch, xx, yy) = x.at(i, ch, yy, xx);
    return y;
  }
};

}  // namespace fidcal::nn
