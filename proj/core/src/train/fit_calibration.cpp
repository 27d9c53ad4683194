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

/// One fully prepared batch: normalized restored images ready for the
/// backbone, the raw degraded images the estimator consumes, oracle maps
/// where the regime uses them, and the labels.
struct CalibBatch {
  Tensor x;
  Tensor degraded01;
  Tensor oracle_fid;
  std::vector<int> labels;
};

}  // namespace

FitResult fit_calibration(const imaging::LoadedDataset& data,
                          const imaging::PreprocessConfig& pp, const TrainConfig& cfg,
                          calib::CalibratedModel& model, restore::Denoiser& restorer,
                          restore::Denoiser* estimator, const fidelity::NoiseMixtureStats& stats,
                          fidelity::Metric metric, const std::string& out_dir) {
  cfg.validate();
  FIDCAL_CHECK(is_calib_regime(cfg.regime), "fit_calibration: calib_* regime required");
  const bool use_estimator = cfg.regime != Regime::calib_oracle;
  const bool finetune = cfg.regime == Regime::calib_end2end;
  FIDCAL_CHECK(restorer.config().residual, "fit_calibration: residual-mode restorer required");
  restorer.set_train_mode(false);
  if (use_estimator) {
    FIDCAL_CHECK(estimator != nullptr, "fit_calibration: estimator regimes need an estimator");
    const restore::DenoiserConfig& ec = estimator->config();
    FIDCAL_CHECK(!ec.residual && ec.out_channels == 1 && ec.clamp_nonneg,
                 "fit_calibration: estimator must be the single-channel clamped head");
    FIDCAL_CHECK(!finetune || !ec.batchnorm,
                 "fit_calibration: end-to-end fine-tuning requires a batchnorm-free estimator");
    estimator->set_train_mode(false);
  }
  const int n_train = static_cast<int>(data.train_images.size());
  const int n_val = static_cast<int>(data.val_images.size());
  FIDCAL_CHECK(n_train > 0 && n_val > 0, "fit_calibration: empty train or val split");
  FIDCAL_CHECK(data.num_classes() == model.backbone().config().num_classes,
               "fit_calibration: dataset classes do not match the backbone head");

  const bool standardize = metric != fidelity::Metric::cosine;
  float norm_mean = 0.0f;
  float norm_inv_std = 1.0f;
  if (standardize) {
    const double model_mean =
        metric == fidelity::Metric::l1 ? stats.half_normal_mean : stats.gamma_mean;
    const double model_var =
        metric == fidelity::Metric::l1 ? stats.half_normal_var : stats.gamma_var;
    const double model_std = std::sqrt(model_var / 3.0);
    FIDCAL_CHECK(model_std > 0.0, "fit_calibration: degenerate mixture statistics");
    norm_mean = static_cast<float>(model_mean);
    norm_inv_std = static_cast<float>(1.0 / model_std);
  }

  const std::string backbone_hash = calib::backbone_content_hash(model.backbone());

  LRSchedule schedule;
  schedule.total_steps = cfg.epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.warmup_steps = cfg.warmup_epochs * internal::steps_per_epoch(n_train, cfg.batch_size);
  schedule.lr_init = cfg.lr_init;
  schedule.validate();

  const auto oracle_maps = [&](const Tensor& restored, const std::vector<Tensor>& clean) {
    std::vector<Tensor> maps;
    maps.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const Tensor r = internal::batch_item(restored, static_cast<int>(i));
      fidelity::FidelityMap m = fidelity::compute_fidelity(r, clean[i], metric);
      if (standardize) m = fidelity::normalize(m, stats);
      maps.push_back(std::move(m.values));
    }
    return internal::stack_batch(maps);
  };

  /// Estimator prediction on degraded inputs, standardized with the same
  /// affine the oracle maps get. Leaves the estimator's forward caches
  /// holding this batch, so an immediate backward fine-tunes on it.
  const auto estimator_maps = [&](const Tensor& degraded01) {
    Tensor raw = estimator->forward_raw(degraded01);
    if (standardize)
      for (auto& v : raw.values()) v = (v - norm_mean) * norm_inv_std;
    return raw;
  };

  // Builds one batch from raw [0, 1] crops and their labels. Oracle maps are
  // attached only when the regime needs them; estimator maps are computed at
  // use time because end-to-end training keeps changing the estimator.
  const auto build_batch = [&](std::vector<Tensor> clean, std::vector<Tensor> degraded,
                               std::vector<int> labels) {
    CalibBatch b;
    b.degraded01 = internal::stack_batch(degraded);
    Tensor restored = restorer.denoise_batch(b.degraded01);
    if (!use_estimator) b.oracle_fid = oracle_maps(restored, clean);
    internal::normalize_batch_inplace(restored, pp);
    b.x = std::move(restored);
    b.labels = std::move(labels);
    return b;
  };

  std::vector<CalibBatch> val_batches;
  std::vector<Tensor> val_fid_cache;
  {
    std::vector<int> order(n_val);
    for (int i = 0; i < n_val; ++i) order[i] = i;
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> clean, degraded;
      std::vector<int> labels;
      for (int idx : chunk) {
        Tensor img = imaging::preprocess_eval(data.val_images[idx], pp);
        Rng rng = internal::val_degrade_stream(cfg.seed, idx);
        degraded.push_back(internal::mixture_degrade(img, rng));
        clean.push_back(std::move(img));
        labels.push_back(data.val_labels[idx]);
      }
      val_batches.push_back(build_batch(std::move(clean), std::move(degraded), std::move(labels)));
    }
    if (use_estimator && !finetune)
      for (const CalibBatch& b : val_batches) val_fid_cache.push_back(estimator_maps(b.degraded01));
  }

  const auto eval_val = [&]() {
    Meter m;
    for (std::size_t b = 0; b < val_batches.size(); ++b) {
      const Tensor& fid = !use_estimator ? val_batches[b].oracle_fid
                          : finetune     ? estimator_maps(val_batches[b].degraded01)
                                         : val_fid_cache[b];
      const Tensor logits = model.forward(val_batches[b].x, fid);
      const auto loss =
          nn::smoothed_cross_entropy(logits, val_batches[b].labels, cfg.label_smoothing_eps);
      m.add(loss.loss, nn::accuracy(logits, val_batches[b].labels),
            static_cast<double>(val_batches[b].labels.size()));
    }
    return std::make_pair(m.loss(), m.metric());
  };

  FitResult result;
  std::tie(result.initial_val_loss, result.initial_val_metric) = eval_val();

  const auto trainable_params = [&]() {
    nn::ParamRefs<float> ps = model.params();
    if (finetune) {
      const nn::ParamRefs<float> es = estimator->params();
      ps.insert(ps.end(), es.begin(), es.end());
    }
    return ps;
  };

  AnyOptimizer opt(cfg.optimizer, trainable_params());
  BestTracker best;
  long gstep = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Meter tm;
    const std::vector<int> order = internal::shuffled_indices(n_train, cfg.seed, epoch);
    for (const std::vector<int>& chunk : internal::make_batches(order, cfg.batch_size)) {
      std::vector<Tensor> clean, degraded;
      std::vector<int> labels;
      for (int idx : chunk) {
        Rng rng_aug = Rng::stream(cfg.seed, {stream_tag::kAugment,
                                             static_cast<std::uint64_t>(epoch),
                                             static_cast<std::uint64_t>(idx)});
        Tensor img = imaging::augment_train(data.train_images[idx], pp, rng_aug);
        Rng rng_deg = internal::train_degrade_stream(cfg.seed, epoch, idx);
        degraded.push_back(internal::mixture_degrade(img, rng_deg));
        clean.push_back(std::move(img));
        labels.push_back(data.train_labels[idx]);
      }
      CalibBatch batch = build_batch(std::move(clean), std::move(degraded), std::move(labels));
      const Tensor fid =
          use_estimator ? estimator_maps(batch.degraded01) : std::move(batch.oracle_fid);

      const Tensor logits = model.forward(batch.x, fid);
      const auto loss = nn::smoothed_cross_entropy(logits, batch.labels, cfg.label_smoothing_eps);
      internal::check_finite(loss.loss, epoch, gstep, "fit_calibration");
      tm.add(loss.loss, nn::accuracy(logits, batch.labels),
             static_cast<double>(batch.labels.size()));

      model.zero_grad();
      if (finetune) nn::zero_grads(estimator->params());
      const Tensor gfid = model.backward(loss.grad);
      if (finetune) {
        Tensor graw = gfid;
        if (standardize)
          for (auto& v : graw.values()) v *= norm_inv_std;
        estimator->backward(graw);
      }
      opt.step(schedule.lr_at(gstep));
      ++gstep;
    }

    const auto [val_loss, val_metric] = eval_val();
    result.curves.push_back({epoch, "train", tm.loss(), tm.metric()});
    result.curves.push_back({epoch, "val", val_loss, val_metric});
    best.offer(epoch, val_loss, val_metric, trainable_params(), {});
  }

  internal::restore_snapshot(best.snapshot, trainable_params(), {});
  result.best_epoch = best.best_epoch;
  result.best_val_loss = best.best_loss;
  result.best_val_metric = best.best_metric;

  FIDCAL_CHECK(calib::backbone_content_hash(model.backbone()) == backbone_hash,
               "fit_calibration: backbone changed during calibration training");

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    result.checkpoint_path = (dir / "checkpoint.fidc").string();
    calib::save_calibration(model, result.checkpoint_path);
    if (finetune)
      restore::save_denoiser(*estimator, (dir / "estimator.fidc").string(),
                             fidelity::kEstimatorKind);
  }
  nlohmann::json manifest = internal::manifest_base("calibration", cfg, schedule, "top1_accuracy");
  manifest["train_images"] = n_train;
  manifest["val_images"] = n_val;
  manifest["num_classes"] = data.num_classes();
  manifest["crop_size"] = pp.crop_size;
  manifest["fidelity_metric"] = fidelity::to_string(metric);
  manifest["fidelity_standardized"] = standardize;
  manifest["backbone_hash"] = backbone_hash;
  const calib::CalibConfig& cc = model.config();
  manifest["modules"] = {{"spatial_mult", cc.spatial_mult},
                         {"spatial_add", cc.spatial_add},
                         {"channel_mult", cc.channel_mult},
                         {"channel_concat", cc.channel_concat},
                         {"residual", cc.residual},
                         {"ensemble", cc.ensemble}};
  manifest["resample"] = imaging::to_string(cc.resample);
  manifest["spatial_hidden"] = cc.spatial_hidden;
  internal::persist_run(out_dir, std::move(manifest), result);
  return result;
}

}  // namespace fidcal::train
