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

#include <functional>
#include <string>
#include <vector>

#include "fidcal/nn/init.hpp"
#include "fidcal/nn/layers.hpp"

namespace fidcal::calib {

/// Plain convolutional classifier: conv(+BN)+ReLU blocks with 2x2 max pools
/// after the configured conv indices, global average pooling, and a single
/// fully connected head. Insertion sites for feature calibration are the
/// network input plus the position before every pooling layer (max pools
/// and the global pool).
struct BackboneConfig {
  int in_channels = 3;
  int num_classes = 12;
  int kernel = 3;
  bool batchnorm = true;
  std::vector<int> conv_widths{32, 32, 64, 64, 128};
  std::vector<int> pool_after{1, 3};

  void validate() const {
    FIDCAL_CHECK(in_channels > 0 && num_classes > 0, "backbone: positive dims required");
    FIDCAL_CHECK(kernel > 0 && kernel % 2 == 1, "backbone: kernel must be odd");
    FIDCAL_CHECK(!conv_widths.empty(), "backbone: at least one conv layer required");
    for (int w : conv_widths) FIDCAL_CHECK(w > 0, "backbone: conv widths must be positive");
    int prev = -1;
    for (int p : pool_after) {
      FIDCAL_CHECK(p > prev, "backbone: pool_after must be strictly increasing");
      FIDCAL_CHECK(p >= 0 && p < static_cast<int>(conv_widths.size()),
                   "backbone: pool_after index out of range");
      prev = p;
    }
  }
};

struct InsertionPoint {
  std::string name;
  int channels = 0;  // channels of the feature arriving at the site
};

/// Decomposition descriptor: the ordered calibration sites and the width of
/// the feature the classifier head consumes.
struct BackboneSplit {
  std::vector<InsertionPoint> insertion_points;
  int feature_dim = 0;

  int num_sites() const { return static_cast<int>(insertion_points.size()); }
};

template <typename T>
class BackboneT {
 public:
  /// Called at an insertion site with (site index, feature); returns the
  /// feature to continue with. Backward hooks see gradients instead.
  using Hook = std::function<TensorT<T>(int, TensorT<T>)>;

  BackboneT() = default;

  explicit BackboneT(const BackboneConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    int in_ch = cfg.in_channels;
    std::size_t next_pool = 0;
    int site = 1;  // site 0 is the network input
    for (std::size_t ci = 0; ci < cfg.conv_widths.size(); ++ci) {
      convs_.emplace_back(in_ch, cfg.conv_widths[ci], cfg.kernel);
      if (cfg.batchnorm) bns_.emplace_back(cfg.conv_widths[ci]);
      relus_.emplace_back();
      ops_.push_back({OpKind::conv, static_cast<int>(ci), -1});
      in_ch = cfg.conv_widths[ci];
      if (next_pool < cfg.pool_after.size() &&
          cfg.pool_after[next_pool] == static_cast<int>(ci)) {
        ops_.push_back({OpKind::pool, static_cast<int>(pools_.size()), site++});
        pools_.emplace_back();
        ++next_pool;
      }
    }
    ops_.push_back({OpKind::gap, 0, site++});
    head_ = nn::Dense<T>(cfg.conv_widths.back(), cfg.num_classes);
    num_sites_ = site;
  }

  const BackboneConfig& config() const { return cfg_; }
  int num_sites() const { return num_sites_; }
  int feature_dim() const { return cfg_.conv_widths.back(); }

  void init(Rng& rng) {
    for (auto& c : convs_) nn::init_conv_he(c, rng);
    nn::init_dense_xavier(head_, rng);
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
    head_.collect(out);
  }

  nn::ParamRefs<T> params() {
    nn::ParamRefs<T> ps;
    collect(ps);
    return ps;
  }

  /// Feature-extractor pass to the pooled {N, C} feature. The hook, when
  /// provided, transforms the tensor entering each insertion site.
  TensorT<T> features(const TensorT<T>& x, const Hook& hook = nullptr) {
    TensorT<T> h = hook ? hook(0, x) : x;
    for (const Op& op : ops_) {
      if (op.site >= 0 && hook) h = hook(op.site, std::move(h));
      switch (op.kind) {
        case OpKind::conv:
          h = convs_[op.index].forward(h);
          if (cfg_.batchnorm) h = bns_[op.index].forward(h);
          h = relus_[op.index].forward(h);
          break;
        case OpKind::pool:
          h = pools_[op.index].forward(h);
          break;
        case OpKind::gap:
          h = gap_.forward(h);
          break;
      }
    }
    return h;
  }

  /// Reverse pass matching features(); the hook sees the gradient arriving
  /// at each site (deepest first) and returns the gradient to continue with.
  /// Returns the gradient with respect to the network input.
  TensorT<T> features_backward(const TensorT<T>& gfeat, const Hook& hook = nullptr) {
    TensorT<T> g = gfeat;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      switch (it->kind) {
        case OpKind::conv:
          g = relus_[it->index].backward(g);
          if (cfg_.batchnorm) g = bns_[it->index].backward(g);
          g = convs_[it->index].backward(g);
          break;
        case OpKind::pool:
          g = pools_[it->index].backward(g);
          break;
        case OpKind::gap:
          g = gap_.backward(g);
          break;
      }
      if (it->site >= 0 && hook) g = hook(it->site, std::move(g));
    }
    if (hook) g = hook(0, std::move(g));
    return g;
  }

  TensorT<T> forward(const TensorT<T>& x) { return head_.forward(features(x)); }

  TensorT<T> backward(const TensorT<T>& glogits) {
    return features_backward(head_.backward(glogits));
  }

  nn::Dense<T>& head() { return head_; }
  const nn::Dense<T>& head() const { return head_; }
  std::vector<nn::Conv2d<T>>& convs() { return convs_; }
  const std::vector<nn::Conv2d<T>>& convs() const { return convs_; }
  std::vector<nn::BatchNorm2d<T>>& bns() { return bns_; }
  const std::vector<nn::BatchNorm2d<T>>& bns() const { return bns_; }

 private:
  enum class OpKind { conv, pool, gap };
  struct Op {
    OpKind kind;
    int index;
    int site;  // insertion site entered before this op, -1 for none
  };

  BackboneConfig cfg_;
  std::vector<nn::Conv2d<T>> convs_;
  std::vector<nn::BatchNorm2d<T>> bns_;
  std::vector<nn::ReLU<T>> relus_;
  std::vector<nn::MaxPool2d<T>> pools_;
  nn::GlobalAvgPool<T> gap_;
  nn::Dense<T> head_;
  std::vector<Op> ops_;
  int num_sites_ = 0;
};

using Backbone = BackboneT<float>;

/// Enumerates the calibration sites of a backbone in forward order. A
/// backbone without internal pooling layers degrades to the input and
/// pre-global-pool sites only; that case is reported at warning level.
template <typename T>
BackboneSplit split_backbone(const BackboneT<T>& net) {
  const BackboneConfig& cfg = net.config();
  if (cfg.pool_after.empty())
    logf(1,
         "warning: split_backbone found no internal pooling layers; spatial "
         "calibration is limited to the input and pre-global-pool sites");
  BackboneSplit split;
  split.feature_dim = cfg.conv_widths.back();
  split.insertion_points.push_back({"input", cfg.in_channels});
  for (std::size_t i = 0; i < cfg.pool_after.size(); ++i)
    split.insertion_points.push_back(
        {"pre_pool" + std::to_string(i + 1), cfg.conv_widths[cfg.pool_after[i]]});
  split.insertion_points.push_back({"pre_gap", cfg.conv_widths.back()});
  return split;
}

/// Checkpoint I/O for the float production backbone.
void save_backbone(const Backbone& net, const std::string& path);
Backbone load_backbone(const std::string& path);

/// Content hash of the serialized checkpoint form of the network; equals the
/// SHA-256 of the file save_backbone writes.
std::string backbone_content_hash(const Backbone& net);

}  // namespace fidcal::calib
