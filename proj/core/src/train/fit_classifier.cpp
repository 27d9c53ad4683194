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

#include <filesystem>
#include <utility>
#include <vector>

#include "common.hpp"
#include "fidcal/nn/init.hpp"
#include "fidcal/nn/losses.hpp"

namespace fidcal::train {

using internal::AnyOptimizer;
using internal::BestTracker;
using internal::Meter;

FitResult fit_classifier(const imaging::LoadedDataset& data, const imaging::PreprocessConfig& pp,
                         const TrainConfig& cfg, calib::Backbone& net,
                         restore::Denoiser* restorer, const std::string& out_dir) {
  cfg.validate();
  FIDCAL_CHECK(!is_calib_regime(cfg.regime),
               "fit_classifier: regime must be setup1_clean, setup2_degraded, or setup3_restored");
  FIDCAL_CHECK(cfg.regime != Regime::setup3_restored || restorer != nullptr,
               "fit_classifier: setup3_restored requires a restorer");
  const int n_train = static_cast<int>(data.train_images.size());
  const int n_val = static_cast<int>(data.val_images.size());
  FIDCAL_CHECK(n_train > 0 && n_val > 0, "fit_classifier: empty train or val split");
  FIDCAL_CHECK(data.num_classes() == net.config().num_classes,
               "fit_classifier: dataset has " + std::to_string(data.num_classes()) +
                   " classes but the network expects " +
                   std::to_string(net.config().num_classes));

  Rng rng_init = Rng::stream(cfg.seed, {stream_tag::kInit, 0});
  nn::init_dense_xavier(net.head(), rng_init);
  net.set_trainable(true);

  LRSchedule schedule;
  schedule.total_steps = cfg.epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.warmup_steps = cfg.warmup_epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.lr_init = cfg.lr_init;
  schedule.validate();

  const bool degrade_inputs = cfg.regime != Regime::setup1_clean;
  const bool restore_inputs = cfg.regime == Regime::setup3_restored;

  std::vector<Tensor> val_batches;
  std::vector<std::vector<int>> val_labels;
  {
    std::vector<int> order(n_val);
    for (int i = 0; i < n_val; ++i) order[i] = i;
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> items;
      std::vector<int> labels;
      items.reserve(chunk.size());
      for (int idx : chunk) {
        Tensor img = imaging::preprocess_eval(data.val_images[idx], pp);
        if (degrade_inputs) {
          Rng rng = internal::val_degrade_stream(cfg.seed, idx);
          img = internal::mixture_degrade(img, rng);
        }
        items.push_back(std::move(img));
        labels.push_back(data.val_labels[idx]);
      }
      Tensor x = internal::stack_batch(items);
      if (restore_inputs) x = restorer->denoise_batch(x);
      internal::normalize_batch_inplace(x, pp);
      val_batches.push_back(std::move(x));
      val_labels.push_back(std::move(labels));
    }
  }

  const auto eval_val = [&]() {
    net.set_train_mode(false);
    Meter m;
    for (std::size_t b = 0; b < val_batches.size(); ++b) {
      const Tensor logits = net.forward(val_batches[b]);
      const auto loss = nn::smoothed_cross_entropy(logits, val_labels[b], cfg.label_smoothing_eps);
      m.add(loss.loss, nn::accuracy(logits, val_labels[b]),
            static_cast<double>(val_labels[b].size()));
    }
    return std::make_pair(m.loss(), m.metric());
  };

  FitResult result;
  std::tie(result.initial_val_loss, result.initial_val_metric) = eval_val();

  AnyOptimizer opt(cfg.optimizer, net.params());
  BestTracker best;
  const std::vector<Tensor*> bn_state = internal::backbone_bn_state(net);
  long gstep = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    net.set_train_mode(true);
    Meter tm;
    const std::vector<int> order = internal::shuffled_indices(n_train, cfg.seed, epoch);
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> items;
      std::vector<int> labels;
      items.reserve(chunk.size());
      for (int idx : chunk) {
        Rng rng_aug = Rng::stream(cfg.seed, {stream_tag::kAugment, static_cast<std::uint64_t>(epoch),
                                             static_cast<std::uint64_t>(idx)});
        Tensor img = imaging::augment_train(data.train_images[idx], pp, rng_aug);
        if (degrade_inputs) {
          Rng rng_deg = internal::train_degrade_stream(cfg.seed, epoch, idx);
          img = internal::mixture_degrade(img, rng_deg);
        }
        items.push_back(std::move(img));
        labels.push_back(data.train_labels[idx]);
      }
      Tensor x = internal::stack_batch(items);
      if (restore_inputs) x = restorer->denoise_batch(x);
      internal::normalize_batch_inplace(x, pp);

      const Tensor logits = net.forward(x);
      const auto loss = nn::smoothed_cross_entropy(logits, labels, cfg.label_smoothing_eps);
      internal::check_finite(loss.loss, epoch, gstep, "fit_classifier");
      tm.add(loss.loss, nn::accuracy(logits, labels), static_cast<double>(labels.size()));

      opt.zero_grad();
      net.backward(loss.grad);
      opt.step(schedule.lr_at(gstep));
      ++gstep;
    }

    const auto [val_loss, val_metric] = eval_val();
    result.curves.push_back({epoch, "train", tm.loss(), tm.metric()});
    result.curves.push_back({epoch, "val", val_loss, val_metric});
    best.offer(epoch, val_loss, val_metric, net.params(), bn_state);
  }

  internal::restore_snapshot(best.snapshot, net.params(), bn_state);
  net.set_train_mode(false);
  result.best_epoch = best.best_epoch;
  result.best_val_loss = best.best_loss;
  result.best_val_metric = best.best_metric;

  if (!out_dir.empty()) {
    result.checkpoint_path = (std::filesystem::path(out_dir) / "checkpoint.fidc").string();
    calib::save_backbone(net, result.checkpoint_path);
  }
  nlohmann::json manifest = internal::manifest_base("classifier", cfg, schedule, "top1_accuracy");
  manifest["train_images"] = n_train;
  manifest["val_images"] = n_val;
  manifest["num_classes"] = data.num_classes();
  manifest["crop_size"] = pp.crop_size;
  internal::persist_run(out_dir, std::move(manifest), result);
  return result;
}

}  // namespace fidcal::train
