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

#include <cmath>
#include <filesystem>
#include <utility>
#include <vector>

#include "common.hpp"
#include "fidcal/nn/losses.hpp"

namespace fidcal::train {

namespace {

using internal::AnyOptimizer;
using internal::BestTracker;
using internal::Meter;

struct PatchRef {
  int image = 0;
  int y = 0;
  int x = 0;
};

std::vector<PatchRef> build_patch_list(const std::vector<imaging::Image>& images, int patch,
                                       int stride) {
  std::vector<PatchRef> refs;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto grid =
        restore::patch_grid(imaging::height(images[i]), imaging::width(images[i]), patch, stride);
    for (const auto& [y, x] : grid) refs.push_back({static_cast<int>(i), y, x});
  }
  return refs;
}

Tensor clean_patch(const std::vector<imaging::Image>& images, const PatchRef& r, int patch) {
  return imaging::crop(images[r.image], r.y, r.x, patch, patch);
}

/// Pooled-MSE PSNR accumulator over clipped predictions.
struct PsnrAccum {
  double sse = 0.0;
  double count = 0.0;

  void add(const Tensor& pred_unclipped, const Tensor& clean) {
    for (std::size_t i = 0; i < pred_unclipped.size(); ++i) {
      float v = pred_unclipped[i];
      if (v < 0.0f) v = 0.0f;
      if (v > 1.0f) v = 1.0f;
      const double d = static_cast<double>(v) - clean[i];
      sse += d * d;
    }
    count += static_cast<double>(pred_unclipped.size());
  }
  double psnr_db() const { return 10.0 * std::log10(1.0 / (sse / count)); }
};

}  // namespace

FitResult train_denoiser(const imaging::LoadedDataset& data, const TrainConfig& cfg,
                         restore::Denoiser& net, int patch, int stride,
                         const std::string& out_dir) {
  cfg.validate();
  FIDCAL_CHECK(patch > 0 && stride > 0, "train_denoiser: patch and stride must be positive");
  FIDCAL_CHECK(net.config().residual, "train_denoiser: residual-mode network required");

  const std::vector<PatchRef> train_refs = build_patch_list(data.train_images, patch, stride);
  const std::vector<PatchRef> val_refs = build_patch_list(data.val_images, patch, stride);
  FIDCAL_CHECK(!train_refs.empty() && !val_refs.empty(),
               "train_denoiser: no patches fit the given images");
  const int n_train = static_cast<int>(train_refs.size());

  LRSchedule schedule;
  schedule.total_steps = cfg.epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.warmup_steps = cfg.warmup_epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.lr_init = cfg.lr_init;
  schedule.validate();

  std::vector<Tensor> val_inputs, val_targets;
  {
    std::vector<int> order(val_refs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> noisy, clean;
      for (int idx : chunk) {
        Tensor c = clean_patch(data.val_images, val_refs[idx], patch);
        Rng rng = internal::val_degrade_stream(cfg.seed, idx);
        noisy.push_back(internal::mixture_degrade(c, rng));
        clean.push_back(std::move(c));
      }
      val_inputs.push_back(internal::stack_batch(noisy));
      val_targets.push_back(internal::stack_batch(clean));
    }
  }

  const auto eval_val = [&]() {
    net.set_train_mode(false);
    Meter m;
    PsnrAccum ps;
    for (std::size_t b = 0; b < val_inputs.size(); ++b) {
      const Tensor raw = net.forward_raw(val_inputs[b]);
      Tensor pred = val_inputs[b];
      for (std::size_t i = 0; i < pred.size(); ++i) pred[i] -= raw[i];
      const auto loss = nn::l1_loss(pred, val_targets[b]);
      m.add(loss.loss, 0.0, static_cast<double>(pred.size()));
      ps.add(pred, val_targets[b]);
    }
    return std::make_pair(m.loss(), ps.psnr_db());
  };

  FitResult result;
  std::tie(result.initial_val_loss, result.initial_val_metric) = eval_val();

  AnyOptimizer opt(cfg.optimizer, net.params());
  BestTracker best;
  const std::vector<Tensor*> bn_state = internal::denoiser_bn_state(net);
  long gstep = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    net.set_train_mode(true);
    Meter tm;
    PsnrAccum tps;
    const std::vector<int> order = internal::shuffled_indices(n_train, cfg.seed, epoch);
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> noisy, clean;
      for (int idx : chunk) {
        Tensor c = clean_patch(data.train_images, train_refs[idx], patch);
        Rng rng = internal::train_degrade_stream(cfg.seed, epoch, idx);
        noisy.push_back(internal::mixture_degrade(c, rng));
        clean.push_back(std::move(c));
      }
      const Tensor x = internal::stack_batch(noisy);
      const Tensor target = internal::stack_batch(clean);

      const Tensor raw = net.forward_raw(x);
      Tensor pred = x;
      for (std::size_t i = 0; i < pred.size(); ++i) pred[i] -= raw[i];
      const auto loss = nn::l1_loss(pred, target);
      internal::check_finite(loss.loss, epoch, gstep, "train_denoiser");
      tm.add(loss.loss, 0.0, static_cast<double>(pred.size()));
      tps.add(pred, target);

      Tensor graw = loss.grad;
      for (auto& v : graw.values()) v = -v;
      opt.zero_grad();
      net.backward(graw);
      opt.step(schedule.lr_at(gstep));
      ++gstep;
    }

    const auto [val_loss, val_metric] = eval_val();
    result.curves.push_back({epoch, "train", tm.loss(), tps.psnr_db()});
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
    restore::save_denoiser(net, result.checkpoint_path);
  }
  nlohmann::json manifest = internal::manifest_base("denoiser", cfg, schedule, "psnr_db");
  manifest["patch"] = patch;
  manifest["stride"] = stride;
  manifest["train_patches"] = n_train;
  manifest["val_patches"] = static_cast<int>(val_refs.size());
  internal::persist_run(out_dir, std::move(manifest), result);
  return result;
}

FitResult train_estimator(const imaging::LoadedDataset& data, const TrainConfig& cfg,
                          restore::Denoiser& net, restore::Denoiser& restorer,
                          fidelity::Metric metric, int patch, int stride,
                          const std::string& out_dir) {
  cfg.validate();
  FIDCAL_CHECK(patch > 0 && stride > 0, "train_estimator: patch and stride must be positive");
  FIDCAL_CHECK(!net.config().residual && net.config().out_channels == 1,
               "train_estimator: single-channel non-residual head required");
  FIDCAL_CHECK(restorer.config().residual, "train_estimator: residual-mode restorer required");
  restorer.set_train_mode(false);
  restorer.set_trainable(false);

  const std::vector<PatchRef> train_refs = build_patch_list(data.train_images, patch, stride);
  const std::vector<PatchRef> val_refs = build_patch_list(data.val_images, patch, stride);
  FIDCAL_CHECK(!train_refs.empty() && !val_refs.empty(),
               "train_estimator: no patches fit the given images");
  const int n_train = static_cast<int>(train_refs.size());

  LRSchedule schedule;
  schedule.total_steps = cfg.epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.warmup_steps = cfg.warmup_epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.lr_init = cfg.lr_init;
  schedule.validate();

  const auto target_maps = [&](const Tensor& noisy, const std::vector<Tensor>& clean) {
    const Tensor restored = restorer.denoise_batch(noisy);
    std::vector<Tensor> maps;
    maps.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const Tensor r = internal::batch_item(restored, static_cast<int>(i));
      maps.push_back(fidelity::compute_fidelity(r, clean[i], metric).values);
    }
    return internal::stack_batch(maps);
  };

  std::vector<Tensor> val_inputs, val_targets;
  {
    std::vector<int> order(val_refs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> noisy, clean;
      for (int idx : chunk) {
        Tensor c = clean_patch(data.val_images, val_refs[idx], patch);
        Rng rng = internal::val_degrade_stream(cfg.seed, idx);
        noisy.push_back(internal::mixture_degrade(c, rng));
        clean.push_back(std::move(c));
      }
      Tensor x = internal::stack_batch(noisy);
      val_targets.push_back(target_maps(x, clean));
      val_inputs.push_back(std::move(x));
    }
  }

  const auto eval_val = [&]() {
    net.set_train_mode(false);
    Meter m;
    for (std::size_t b = 0; b < val_inputs.size(); ++b) {
      const Tensor pred = net.forward_raw(val_inputs[b]);
      const auto loss = nn::l1_loss(pred, val_targets[b]);
      m.add(loss.loss, -loss.loss, static_cast<double>(pred.size()));
    }
    return std::make_pair(m.loss(), m.metric());
  };

  FitResult result;
  std::tie(result.initial_val_loss, result.initial_val_metric) = eval_val();

  AnyOptimizer opt(cfg.optimizer, net.params());
  BestTracker best;
  const std::vector<Tensor*> bn_state = internal::denoiser_bn_state(net);
  long gstep = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    net.set_train_mode(true);
    Meter tm;
    const std::vector<int> order = internal::shuffled_indices(n_train, cfg.seed, epoch);
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> noisy, clean;
      for (int idx : chunk) {
        Tensor c = clean_patch(data.train_images, train_refs[idx], patch);
        Rng rng = internal::train_degrade_stream(cfg.seed, epoch, idx);
        noisy.push_back(internal::mixture_degrade(c, rng));
        clean.push_back(std::move(c));
      }
      const Tensor x = internal::stack_batch(noisy);
      const Tensor target = target_maps(x, clean);

      const Tensor pred = net.forward_raw(x);
      const auto loss = nn::l1_loss(pred, target);
      internal::check_finite(loss.loss, epoch, gstep, "train_estimator");
      tm.add(loss.loss, -loss.loss, static_cast<double>(pred.size()));

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
    restore::save_denoiser(net, result.checkpoint_path, fidelity::kEstimatorKind);
  }
  nlohmann::json manifest = internal::manifest_base("estimator", cfg, schedule, "neg_mae");
  manifest["patch"] = patch;
  manifest["stride"] = stride;
  manifest["train_patches"] = n_train;
  manifest["val_patches"] = static_cast<int>(val_refs.size());
  manifest["fidelity_metric"] = fidelity::to_string(metric);
  internal::persist_run(out_dir, std::move(manifest), result);
  return result;
}

}  // namespace fidcal::train
