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
#include <variant>
#include <vector>

#include <json.hpp>

#include "fidcal/degrade/degrade.hpp"
#include "fidcal/nn/optim.hpp"
#include "fidcal/rng.hpp"
#include "fidcal/tensor.hpp"
#include "fidcal/train/train.hpp"

namespace fidcal::train::internal {

inline std::vector<int> shuffled_indices(int n, std::uint64_t seed, int epoch) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng::stream(seed, {stream_tag::kBatchOrder, static_cast<std::uint64_t>(epoch)});
  rng.shuffle(order.begin(), order.end());
  return order;
}

/// Consecutive chunks of at most `batch` indices; the last chunk may be short.
inline std::vector<std::vector<int>> make_batches(const std::vector<int>& order, int batch) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < order.size(); i += batch) {
    const std::size_t end = std::min(order.size(), i + batch);
    out.emplace_back(order.begin() + i, order.begin() + end);
  }
  return out;
}

inline long steps_per_epoch(int n, int batch) {
  return (static_cast<long>(n) + batch - 1) / batch;
}

inline Tensor stack_batch(const std::vector<Tensor>& items) {
  FIDCAL_CHECK(!items.empty(), "train: empty batch");
  const Tensor& first = items.front();
  FIDCAL_CHECK(first.ndim() == 3, "train: batch items must be CHW");
  Tensor out({static_cast<int>(items.size()), first.dim(0), first.dim(1), first.dim(2)});
  for (std::size_t i = 0; i < items.size(); ++i) {
    FIDCAL_CHECK(items[i].same_shape(first), "train: ragged batch");
    std::copy(items[i].data(), items[i].data() + items[i].size(),
              out.data() + i * first.size());
  }
  return out;
}

inline Tensor batch_item(const Tensor& nchw, int i) {
  FIDCAL_CHECK(nchw.ndim() == 4 && i >= 0 && i < nchw.dim(0), "train: batch item out of range");
  Tensor out({nchw.dim(1), nchw.dim(2), nchw.dim(3)});
  std::copy(nchw.data() + static_cast<std::size_t>(i) * out.size(),
            nchw.data() + static_cast<std::size_t>(i + 1) * out.size(), out.data());
  return out;
}

/// Per-image mixture degradation: sigma drawn uniformly from the mixture
/// grid, then seeded additive Gaussian noise. sigma == 0 leaves the image
/// clean (up to the [0, 1] clip, which is a no-op on in-range inputs).
inline Tensor mixture_degrade(const Tensor& img01, Rng& rng) {
  degrade::DegradationSpec spec;
  spec.kind = degrade::Kind::awgn;
  spec.level = degrade::draw_mixture_sigma(rng);
  spec.seed = rng.next_u64();
  return degrade::awgn(img01, spec).first;
}

inline Rng train_degrade_stream(std::uint64_t seed, int epoch, int index) {
  return Rng::stream(seed, {stream_tag::kDegrade, static_cast<std::uint64_t>(epoch),
                            static_cast<std::uint64_t>(index)});
}

inline Rng val_degrade_stream(std::uint64_t seed, int index) {
  return Rng::stream(seed, {stream_tag::kValDegrade, static_cast<std::uint64_t>(index)});
}

inline void normalize_batch_inplace(Tensor& nchw, const imaging::PreprocessConfig& pp) {
  FIDCAL_CHECK(nchw.ndim() == 4 && nchw.dim(1) == 3, "train: expected NCHW with 3 channels");
  const std::size_t plane = static_cast<std::size_t>(nchw.dim(2)) * nchw.dim(3);
  for (int i = 0; i < nchw.dim(0); ++i)
    for (int c = 0; c < 3; ++c) {
      float* p = &nchw.at(i, c, 0, 0);
      const float m = pp.mean[static_cast<std::size_t>(c)];
      const float inv = 1.0f / pp.stdev[static_cast<std::size_t>(c)];
      for (std::size_t j = 0; j < plane; ++j) p[j] = (p[j] - m) * inv;
    }
}

inline void check_finite(double loss, int epoch, long step, const char* module) {
  FIDCAL_CHECK(std::isfinite(loss),
               std::string(module) + ": training diverged, non-finite loss at epoch " +
                   std::to_string(epoch) + " step " + std::to_string(step));
}

/// Weight-averaged loss/metric accumulator for one epoch and split.
struct Meter {
  double loss_sum = 0.0;
  double metric_sum = 0.0;
  double weight = 0.0;

  void add(double loss, double metric, double w) {
    loss_sum += loss * w;
    metric_sum += metric * w;
    weight += w;
  }
  double loss() const { return weight > 0 ? loss_sum / weight : 0.0; }
  double metric() const { return weight > 0 ? metric_sum / weight : 0.0; }
};

/// Full copy of parameter values plus any extra state tensors (batch-norm
/// running statistics), enough to roll a network back to its best epoch.
struct Snapshot {
  std::vector<Tensor> params;
  std::vector<Tensor> extras;
};

inline Snapshot take_snapshot(const nn::ParamRefs<float>& ps, const std::vector<Tensor*>& extras) {
  Snapshot s;
  s.params.reserve(ps.size());
  for (const nn::Param<float>* p : ps) s.params.push_back(p->value);
  s.extras.reserve(extras.size());
  for (const Tensor* t : extras) s.extras.push_back(*t);
  return s;
}

inline void restore_snapshot(const Snapshot& s, const nn::ParamRefs<float>& ps,
                             const std::vector<Tensor*>& extras) {
  FIDCAL_CHECK(s.params.size() == ps.size() && s.extras.size() == extras.size(),
               "train: snapshot layout mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = s.params[i];
  for (std::size_t i = 0; i < extras.size(); ++i) *extras[i] = s.extras[i];
}

inline std::vector<Tensor*> backbone_bn_state(calib::Backbone& net) {
  std::vector<Tensor*> out;
  for (auto& bn : net.bns()) {
    out.push_back(&bn.running_mean());
    out.push_back(&bn.running_var());
  }
  return out;
}

inline std::vector<Tensor*> denoiser_bn_state(restore::Denoiser& net) {
  std::vector<Tensor*> out;
  for (auto& bn : net.bns()) {
    out.push_back(&bn.running_mean());
    out.push_back(&bn.running_var());
  }
  return out;
}

/// Either optimizer behind one step/zero interface, picked by config.
class AnyOptimizer {
 public:
  AnyOptimizer(Optimizer kind, nn::ParamRefs<float> params)
      : impl_(kind == Optimizer::nag
                  ? Impl(nn::Nag<float>(std::move(params)))
                  : Impl(nn::Adam<float>(std::move(params)))) {}

  void step(double lr) {
    std::visit([lr](auto& opt) { opt.step(static_cast<float>(lr)); }, impl_);
  }
  void zero_grad() {
    std::visit([](auto& opt) { opt.zero_grad(); }, impl_);
  }

 private:
  using Impl = std::variant<nn::Nag<float>, nn::Adam<float>>;
  Impl impl_;
};

/// Tracks the best validation epoch (strictly greater metric wins, ties keep
/// the earliest epoch) and the snapshot to restore at the end of the fit.
struct BestTracker {
  int best_epoch = -1;
  double best_loss = 0.0;
  double best_metric = 0.0;
  Snapshot snapshot;
  bool has_snapshot = false;

  void offer(int epoch, double loss, double metric, const nn::ParamRefs<float>& ps,
             const std::vector<Tensor*>& extras) {
    if (!has_snapshot || metric > best_metric) {
      best_epoch = epoch;
      best_loss = loss;
      best_metric = metric;
      snapshot = take_snapshot(ps, extras);
      has_snapshot = true;
    }
  }
};

nlohmann::json manifest_base(const std::string& module, const TrainConfig& cfg,
                             const LRSchedule& schedule, const std::string& metric_name);

/// Writes curves.csv and manifest.json into out_dir and fills the result's
/// path fields; checkpoint_path must already name the written checkpoint.
void persist_run(const std::string& out_dir, nlohmann::json manifest, FitResult& result);

}  // namespace fidcal::train::internal
