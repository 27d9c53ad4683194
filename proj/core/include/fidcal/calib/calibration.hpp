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

#include <cmath>
#include <string>
#include <vector>

#include "fidcal/calib/backbone.hpp"
#include "fidcal/imaging/resample.hpp"
#include "fidcal/nn/init.hpp"
#include "fidcal/nn/layers.hpp"
#include "fidcal/nn/optim.hpp"

namespace fidcal::calib {

/// Module-enable flags and widths for the calibration network. Disabling a
/// flag removes the corresponding stage from the forward pass entirely.
struct CalibConfig {
  int spatial_hidden = 64;
  int channel_hidden = 0;  // 0 uses the backbone feature dimension
  int kernel = 3;
  bool spatial_mult = true;
  bool spatial_add = true;
  bool channel_mult = true;
  bool channel_concat = true;
  bool residual = true;
  bool ensemble = true;
  imaging::Resample resample = imaging::Resample::bilinear;

  bool spatial_enabled() const { return spatial_mult || spatial_add; }
  bool channel_feature_needed() const { return channel_mult || channel_concat; }

  void validate() const {
    FIDCAL_CHECK(spatial_hidden > 0, "calib: spatial_hidden must be positive");
    FIDCAL_CHECK(channel_hidden >= 0, "calib: channel_hidden must be nonnegative");
    FIDCAL_CHECK(kernel > 0 && kernel % 2 == 1, "calib: kernel must be odd");
  }
};

/// Conv+ReLU+Conv+ReLU+Conv on a single-channel map, preserving its size.
template <typename T>
class ConvStack3 {
 public:
  ConvStack3() = default;
  ConvStack3(int hidden, int kernel)
      : c1_(1, hidden, kernel), c2_(hidden, hidden, kernel), c3_(hidden, 1, kernel) {}

  void init(Rng& rng, bool zero_final) {
    nn::init_conv_he(c1_, rng);
    nn::init_conv_he(c2_, rng);
    if (zero_final)
      nn::init_conv_zero(c3_);
    else
      nn::init_conv_he(c3_, rng);
  }

  void collect(nn::ParamRefs<T>& out) {
    c1_.collect(out);
    c2_.collect(out);
    c3_.collect(out);
  }

  TensorT<T> forward(const TensorT<T>& x) {
    TensorT<T> h = r1_.forward(c1_.forward(x));
    h = r2_.forward(c2_.forward(h));
    return c3_.forward(h);
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    TensorT<T> g = c2_.backward(r2_.backward(c3_.backward(gy)));
    return c1_.backward(r1_.backward(g));
  }

  nn::Conv2d<T>& conv(int i) {
    FIDCAL_CHECK(i >= 0 && i < 3, "convstack: layer index out of range");
    return i == 0 ? c1_ : (i == 1 ? c2_ : c3_);
  }
  const nn::Conv2d<T>& conv(int i) const {
    return const_cast<ConvStack3*>(this)->conv(i);
  }

 private:
  nn::Conv2d<T> c1_, c2_, c3_;
  nn::ReLU<T> r1_, r2_;
};

/// FC+ReLU+FC.
template <typename T>
class FcStack2 {
 public:
  FcStack2() = default;
  FcStack2(int in_dim, int hidden, int out_dim)
      : fc1_(in_dim, hidden), fc2_(hidden, out_dim) {}

  void init(Rng& rng, bool zero_final) {
    nn::init_dense_xavier(fc1_, rng);
    if (zero_final)
      nn::init_dense_zero(fc2_);
    else
      nn::init_dense_xavier(fc2_, rng);
  }

  void collect(nn::ParamRefs<T>& out) {
    fc1_.collect(out);
    fc2_.collect(out);
  }

  TensorT<T> forward(const TensorT<T>& x) { return fc2_.forward(relu_.forward(fc1_.forward(x))); }

  TensorT<T> backward(const TensorT<T>& gy) {
    return fc1_.backward(relu_.backward(fc2_.backward(gy)));
  }

  nn::Dense<T>& fc1() { return fc1_; }
  nn::Dense<T>& fc2() { return fc2_; }
  const nn::Dense<T>& fc1() const { return fc1_; }
  const nn::Dense<T>& fc2() const { return fc2_; }

 private:
  nn::Dense<T> fc1_, fc2_;
  nn::ReLU<T> relu_;
};

/// One insertion site: multiplicative gating by 2*sigmoid of a conv stack on
/// the resized fidelity map, an additive branch from a second stack, and an
/// optional residual skip y = x + s * (candidate - x) with a trainable
/// scalar s starting at 0 (exact identity at initialization). Without the
/// skip, identity at initialization instead comes from zero-initialized
/// final stack layers (gate 1, addition 0).
template <typename T>
class SpatialBlock {
 public:
  SpatialBlock() = default;
  SpatialBlock(int hidden, int kernel, bool mult, bool add, bool residual,
               imaging::Resample resample)
      : gate_stack_(hidden, kernel),
        add_stack_(hidden, kernel),
        resizer_(resample),
        mult_(mult),
        add_(add),
        residual_(residual) {
    s_.init_shape("s", {1});
  }

  bool active() const { return mult_ || add_; }

  void init(Rng& rng) {
    // With the residual skip, s = 0 already guarantees identity and keeping
    // the final conv layers random gives s a nonzero gradient at step one;
    // zero finals together with s = 0 would be a stationary saddle.
    gate_stack_.init(rng, !residual_);
    add_stack_.init(rng, !residual_);
    s_.value.fill(T(0));
  }

  void collect(nn::ParamRefs<T>& out) {
    if (!active()) return;
    if (mult_) gate_stack_.collect(out);
    if (add_) add_stack_.collect(out);
    if (residual_) out.push_back(&s_);
  }

  TensorT<T> forward(const TensorT<T>& x, const TensorT<T>& fid) {
    if (!active()) return x;
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    FIDCAL_CHECK(fid.ndim() == 4 && fid.dim(0) == n && fid.dim(1) == 1,
                 "spatial block: expected {N, 1, H, W} fidelity maps");
    x_ = x;
    const TensorT<T> fid_r = resizer_.forward(fid, h, w);
    FIDCAL_CHECK(fid_r.dim(2) == h && fid_r.dim(3) == w,
                 "spatial block: fidelity resize mismatch");
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    TensorT<T> candidate = x;
    if (mult_) {
      TensorT<T> z = gate_stack_.forward(fid_r);
      sig_ = z;
      for (auto& v : sig_.values()) v = T(1) / (T(1) + std::exp(-v));
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
          T* row = &candidate.at(i, ch, 0, 0);
          const T* g = sig_.data() + static_cast<std::size_t>(i) * plane;
          for (std::size_t p = 0; p < plane; ++p) row[p] *= T(2) * g[p];
        }
    }
    if (add_) {
      const TensorT<T> a = add_stack_.forward(fid_r);
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
          T* row = &candidate.at(i, ch, 0, 0);
          const T* ap = a.data() + static_cast<std::size_t>(i) * plane;
          for (std::size_t p = 0; p < plane; ++p) row[p] += ap[p];
        }
    }
    if (!residual_) return candidate;

    diff_ = candidate;
    for (std::size_t i = 0; i < diff_.size(); ++i) diff_[i] -= x_[i];
    TensorT<T> y = x;
    const T s = s_.value[0];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * diff_[i];
    return y;
  }

  /// Backward for the site. Accumulates the fidelity-map gradient into
  /// *gfid (same shape as the forward fid argument) and returns the
  /// gradient with respect to the feature input.
  TensorT<T> backward(const TensorT<T>& gy, TensorT<T>* gfid) {
    if (!active()) return gy;
    const int n = x_.dim(0), c = x_.dim(1), h = x_.dim(2), w = x_.dim(3);
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    TensorT<T> gcand = gy;
    TensorT<T> gx;
    if (residual_) {
      const T s = s_.value[0];
      T gs = T(0);
      for (std::size_t i = 0; i < gy.size(); ++i) gs += gy[i] * diff_[i];
      s_.grad[0] += gs;
      for (auto& v : gcand.values()) v *= s;
      gx = gy;
      for (auto& v : gx.values()) v *= T(1) - s;
    } else {
      gx = TensorT<T>(x_.shape());
      gx.fill(T(0));
    }

    TensorT<T> gmap({n, 1, h, w});
    gmap.fill(T(0));
    if (add_) {
      TensorT<T> ga({n, 1, h, w});
      ga.fill(T(0));
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
          const T* row = &gcand.at(i, ch, 0, 0);
          T* ap = ga.data() + static_cast<std::size_t>(i) * plane;
          for (std::size_t p = 0; p < plane; ++p) ap[p] += row[p];
        }
      const TensorT<T> gfa = add_stack_.backward(ga);
      for (std::size_t i = 0; i < gmap.size(); ++i) gmap[i] += gfa[i];
    }
    if (mult_) {
      TensorT<T> gz({n, 1, h, w});
      gz.fill(T(0));
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
          const T* grow = &gcand.at(i, ch, 0, 0);
          const T* xrow = &x_.at(i, ch, 0, 0);
          const T* g = sig_.data() + static_cast<std::size_t>(i) * plane;
          T* zp = gz.data() + static_cast<std::size_t>(i) * plane;
          T* xg = &gx.at(i, ch, 0, 0);
          for (std::size_t p = 0; p < plane; ++p) {
            xg[p] += grow[p] * T(2) * g[p];
            zp[p] += grow[p] * xrow[p] * T(2) * g[p] * (T(1) - g[p]);
          }
        }
      const TensorT<T> gfg = gate_stack_.backward(gz);
      for (std::size_t i = 0; i < gmap.size(); ++i) gmap[i] += gfg[i];
    } else {
      // Without the gate the candidate passes the feature through directly.
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gcand[i];
    }

    const TensorT<T> gf = resizer_.backward(gmap);
    FIDCAL_CHECK(gfid != nullptr && gfid->same_shape(gf),
                 "spatial block: fidelity gradient accumulator mismatch");
    for (std::size_t i = 0; i < gf.size(); ++i) (*gfid)[i] += gf[i];
    return gx;
  }

  void set_resample(imaging::Resample mode) { resizer_.set_mode(mode); }

  ConvStack3<T>& gate_stack() { return gate_stack_; }
  ConvStack3<T>& add_stack() { return add_stack_; }
  nn::Param<T>& s() { return s_; }
  const ConvStack3<T>& gate_stack() const { return gate_stack_; }
  const ConvStack3<T>& add_stack() const { return add_stack_; }
  const nn::Param<T>& s() const { return s_; }

 private:
  ConvStack3<T> gate_stack_, add_stack_;
  nn::Param<T> s_;
  nn::Resample2d<T> resizer_;
  bool mult_ = true, add_ = true, residual_ = true;
  TensorT<T> x_, sig_, diff_;
};

/// Length-C channel descriptor of a fidelity map: the flattened map and the
/// flattened transposed map, each resampled to C/2 and concatenated.
template <typename T>
class ChannelFeature {
 public:
  ChannelFeature() = default;
  ChannelFeature(int feature_dim, imaging::Resample mode)
      : c_(feature_dim), down_(mode), down_t_(mode) {
    FIDCAL_CHECK(c_ > 0 && c_ % 2 == 0,
                 "channel feature: feature dimension must be even");
  }

  TensorT<T> forward(const TensorT<T>& fid) {
    FIDCAL_CHECK(fid.ndim() == 4 && fid.dim(1) == 1,
                 "channel feature: expected {N, 1, H, W} input");
    in_shape_ = fid.shape();
    const int n = fid.dim(0), h = fid.dim(2), w = fid.dim(3);
    const int half = c_ / 2;

    TensorT<T> flat = fid;
    flat.reshape({n, h * w});
    const TensorT<T> v1 = down_.forward(flat, half);
    TensorT<T> flat_t = transpose_.forward(fid);
    flat_t.reshape({n, w * h});
    const TensorT<T> v2 = down_t_.forward(flat_t, half);

    TensorT<T> out({n, c_});
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < half; ++j) {
        out[static_cast<std::size_t>(i) * c_ + j] = v1[static_cast<std::size_t>(i) * half + j];
        out[static_cast<std::size_t>(i) * c_ + half + j] =
            v2[static_cast<std::size_t>(i) * half + j];
      }
    }
    return out;
  }

  TensorT<T> backward(const TensorT<T>& gy) {
    const int n = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
    const int half = c_ / 2;
    TensorT<T> g1({n, half}), g2({n, half});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < half; ++j) {
        g1[static_cast<std::size_t>(i) * half + j] = gy[static_cast<std::size_t>(i) * c_ + j];
        g2[static_cast<std::size_t>(i) * half + j] =
            gy[static_cast<std::size_t>(i) * c_ + half + j];
      }

    TensorT<T> gflat = down_.backward(g1);
    gflat.reshape({n, 1, h, w});
    TensorT<T> gflat_t = down_t_.backward(g2);
    gflat_t.reshape({n, 1, w, h});
    const TensorT<T> gt = transpose_.backward(gflat_t);
    for (std::size_t i = 0; i < gflat.size(); ++i) gflat[i] += gt[i];
    return gflat;
  }

  void set_resample(imaging::Resample mode) {
    down_.set_mode(mode);
    down_t_.set_mode(mode);
  }

 private:
  int c_ = 0;
  nn::Resample1d<T> down_, down_t_;
  nn::TransposeHW<T> transpose_;
  std::vector<int> in_shape_;
};

/// A frozen backbone wrapped with the fidelity-conditioned calibration
/// modules. Only the calibration parameters train; the backbone (both the
/// calibrated copy and the untouched copy feeding the ensemble) stays in
/// inference mode with immutable weights.
template <typename T>
class CalibratedModelT {
 public:
  CalibratedModelT() = default;

  CalibratedModelT(const BackboneT<T>& backbone, const CalibConfig& cfg)
      : cfg_(cfg), net_(backbone), orig_net_(backbone) {
    cfg.validate();
    net_.set_trainable(false);
    orig_net_.set_trainable(false);
    net_.set_train_mode(false);
    orig_net_.set_train_mode(false);

    const int c = net_.feature_dim();
    const int hidden = cfg.channel_hidden > 0 ? cfg.channel_hidden : c;
    if (cfg.channel_feature_needed()) {
      chan_feat_ = ChannelFeature<T>(c, cfg.resample);
      mult_stack_ = FcStack2<T>(c, hidden, c);
      concat_stack_ = FcStack2<T>(2 * c, hidden, c);
    }
    for (int i = 0; i < net_.num_sites(); ++i)
      sites_.emplace_back(cfg.spatial_hidden, cfg.kernel, cfg.spatial_mult, cfg.spatial_add,
                          cfg.residual, cfg.resample);
    ensemble_params_.init_shape("ensemble", {c});
    ensemble_params_.value.fill(T(0));
  }

  const CalibConfig& config() const { return cfg_; }
  BackboneT<T>& backbone() { return net_; }
  const BackboneT<T>& backbone() const { return net_; }
  int feature_dim() const { return net_.feature_dim(); }
  int num_sites() const { return net_.num_sites(); }

  void init(Rng& rng) {
    for (auto& site : sites_) site.init(rng);
    if (cfg_.channel_feature_needed()) {
      mult_stack_.init(rng, true);
      concat_stack_.init(rng, true);
    }
    ensemble_params_.value.fill(T(0));
  }

  /// Trainable calibration parameters of the enabled modules only.
  nn::ParamRefs<T> params() {
    nn::ParamRefs<T> ps;
    if (cfg_.spatial_enabled())
      for (auto& site : sites_) site.collect(ps);
    if (cfg_.channel_mult) mult_stack_.collect(ps);
    if (cfg_.channel_concat) concat_stack_.collect(ps);
    if (cfg_.ensemble) ps.push_back(&ensemble_params_);
    return ps;
  }

  /// Zeroes calibration gradients and the frozen backbone's scratch
  /// gradients (which backward fills but training never applies).
  void zero_grad() {
    nn::zero_grads(params());
    nn::zero_grads(net_.params());
  }

  /// Logits for a batch of backbone-ready inputs and their normalized
  /// fidelity maps (both {N, ...}; maps are {N, 1, H, W}).
  TensorT<T> forward(const TensorT<T>& x, const TensorT<T>& fid) {
    FIDCAL_CHECK(x.ndim() == 4, "calibrated model: expected NCHW input");
    FIDCAL_CHECK(fid.ndim() == 4 && fid.dim(0) == x.dim(0) && fid.dim(1) == 1,
                 "calibrated model: expected {N, 1, H, W} fidelity maps");
    fid_shape_ = fid.shape();
    const int c = net_.feature_dim();

    typename BackboneT<T>::Hook hook = nullptr;
    if (cfg_.spatial_enabled())
      hook = [&](int site, TensorT<T> t) { return sites_[site].forward(t, fid); };
    TensorT<T> h = net_.features(x, hook);

    if (cfg_.channel_feature_needed()) fid_feat_ = chan_feat_.forward(fid);
    if (cfg_.channel_mult) {
      mult_in_ = h;
      TensorT<T> z = mult_stack_.forward(fid_feat_);
      sig_c_ = z;
      for (auto& v : sig_c_.values()) v = T(1) / (T(1) + std::exp(-v));
      for (std::size_t i = 0; i < h.size(); ++i) h[i] = mult_in_[i] * T(2) * sig_c_[i];
    }
    if (cfg_.channel_concat) {
      concat_skip_ = h;
      const int n = h.dim(0);
      TensorT<T> joint({n, 2 * c});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
          joint[static_cast<std::size_t>(i) * 2 * c + j] = h[static_cast<std::size_t>(i) * c + j];
          joint[static_cast<std::size_t>(i) * 2 * c + c + j] =
              fid_feat_[static_cast<std::size_t>(i) * c + j];
        }
      TensorT<T> so = concat_stack_.forward(joint);
      if (cfg_.residual) {
        for (std::size_t i = 0; i < so.size(); ++i) so[i] += concat_skip_[i];
      }
      h = std::move(so);
    }

    TensorT<T> out;
    if (cfg_.ensemble) {
      h2_ = h;
      orig_feat_ = orig_net_.features(x);
      alpha_ = ensemble_params_.value;
      for (auto& v : alpha_.values()) v = T(1) / (T(1) + std::exp(-v));
      out = TensorT<T>(h.shape());
      const int n = h.dim(0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * c + j;
          out[idx] = alpha_[j] * h2_[idx] + (T(1) - alpha_[j]) * orig_feat_[idx];
        }
    } else {
      out = std::move(h);
    }
    return net_.head().forward(out);
  }

  /// Backpropagates a logits gradient through the calibration modules and
  /// the frozen backbone. Returns the gradient with respect to the fidelity
  /// map (for end-to-end estimator fine-tuning); the frozen weights receive
  /// scratch gradients that training never applies.
  TensorT<T> backward(const TensorT<T>& glogits) {
    const int c = net_.feature_dim();
    TensorT<T> g = net_.head().backward(glogits);
    const int n = g.dim(0);

    if (cfg_.ensemble) {
      for (int j = 0; j < c; ++j) {
        T acc = T(0);
        for (int i = 0; i < n; ++i) {
          const std::size_t idx = static_cast<std::size_t>(i) * c + j;
          acc += g[idx] * (h2_[idx] - orig_feat_[idx]);
        }
        ensemble_params_.grad[j] += acc * alpha_[j] * (T(1) - alpha_[j]);
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) g[static_cast<std::size_t>(i) * c + j] *= alpha_[j];
    }

    TensorT<T> gfid_feat;
    const bool channel = cfg_.channel_feature_needed();
    if (channel) {
      gfid_feat = TensorT<T>({n, c});
      gfid_feat.fill(T(0));
    }

    if (cfg_.channel_concat) {
      const TensorT<T> gjoint = concat_stack_.backward(g);
      TensorT<T> gh({n, c});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
          gh[static_cast<std::size_t>(i) * c + j] =
              gjoint[static_cast<std::size_t>(i) * 2 * c + j];
          gfid_feat[static_cast<std::size_t>(i) * c + j] +=
              gjoint[static_cast<std::size_t>(i) * 2 * c + c + j];
        }
      if (cfg_.residual)
        for (std::size_t i = 0; i < gh.size(); ++i) gh[i] += g[i];
      g = std::move(gh);
    }

    if (cfg_.channel_mult) {
      TensorT<T> gz({n, c});
      for (std::size_t i = 0; i < g.size(); ++i) {
        gz[i] = g[i] * mult_in_[i] * T(2) * sig_c_[i] * (T(1) - sig_c_[i]);
        g[i] *= T(2) * sig_c_[i];
      }
      const TensorT<T> gf = mult_stack_.backward(gz);
      for (std::size_t i = 0; i < gfid_feat.size(); ++i) gfid_feat[i] += gf[i];
    }

    TensorT<T> gfid(fid_shape_);
    gfid.fill(T(0));
    if (channel) {
      const TensorT<T> gc = chan_feat_.backward(gfid_feat);
      for (std::size_t i = 0; i < gfid.size(); ++i) gfid[i] += gc[i];
    }
    if (cfg_.spatial_enabled()) {
      net_.features_backward(
          g, [&](int site, TensorT<T> t) { return sites_[site].backward(t, &gfid); });
    }
    return gfid;
  }

  std::vector<SpatialBlock<T>>& sites() { return sites_; }
  const std::vector<SpatialBlock<T>>& sites() const { return sites_; }
  FcStack2<T>& mult_stack() { return mult_stack_; }
  FcStack2<T>& concat_stack() { return concat_stack_; }
  const FcStack2<T>& mult_stack() const { return mult_stack_; }
  const FcStack2<T>& concat_stack() const { return concat_stack_; }
  nn::Param<T>& ensemble_gate() { return ensemble_params_; }
  const nn::Param<T>& ensemble_gate() const { return ensemble_params_; }

  /// Drives every ensemble weight to sigmoid(-kEnsembleOff) = 0, so the
  /// model reproduces the untouched backbone path exactly.
  void force_original_path() { ensemble_params_.value.fill(T(-kEnsembleOff)); }

  static constexpr double kEnsembleOff = 1e9;

 private:
  CalibConfig cfg_;
  BackboneT<T> net_, orig_net_;
  std::vector<SpatialBlock<T>> sites_;
  ChannelFeature<T> chan_feat_;
  FcStack2<T> mult_stack_, concat_stack_;
  nn::Param<T> ensemble_params_;

  std::vector<int> fid_shape_;
  TensorT<T> fid_feat_, mult_in_, sig_c_, concat_skip_, h2_, orig_feat_, alpha_;
};

using CalibratedModel = CalibratedModelT<float>;

/// Calibration checkpoint I/O. The checkpoint binds to the backbone it was
/// trained against via the backbone's content hash; loading against a
/// different backbone fails.
void save_calibration(const CalibratedModel& model, const std::string& path);
CalibratedModel load_calibration(const std::string& path, const Backbone& backbone);

}  // namespace fidcal::calib
