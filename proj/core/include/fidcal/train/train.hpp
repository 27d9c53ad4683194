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

#include <cstdint>
#include <string>
#include <vector>

#include "fidcal/calib/backbone.hpp"
#include "fidcal/calib/calibration.hpp"
#include "fidcal/fidelity/fidelity.hpp"
#include "fidcal/imaging/dataset.hpp"
#include "fidcal/imaging/preprocess.hpp"
#include "fidcal/restore/denoiser.hpp"

namespace fidcal::train {

enum class Optimizer { nag, adam };

/// setup1 trains on clean images only; setup2 draws a fresh per-image sigma
/// from the mixture grid every epoch; setup3 additionally restores each
/// degraded image before feeding the network. The calib regimes train only
/// the calibration modules over a frozen backbone, differing in where the
/// fidelity maps come from: ground-truth distance maps, a frozen pretrained
/// estimator, or an estimator fine-tuned jointly with the calibration.
enum class Regime {
  setup1_clean,
  setup2_degraded,
  setup3_restored,
  calib_oracle,
  calib_pretrained,
  calib_end2end,
};

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);
std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);
bool is_calib_regime(Regime r);

/// Batch-step linear warmup into cosine decay:
///   step <  warmup_steps: lr_init * (step + 1) / warmup_steps
///   step >= warmup_steps: lr_init * 0.5 * (1 + cos(pi * progress)),
///     progress = (step - warmup_steps) / (total_steps - warmup_steps)
/// The two branches meet at lr_init, so the schedule is continuous.
struct LRSchedule {
  long total_steps = 0;
  long warmup_steps = 0;
  double lr_init = 0.0;

  void validate() const;

  /// Learning rate for a step in [0, total_steps). Out of range throws.
  double lr_at(long step) const;
};

struct TrainConfig {
  Optimizer optimizer = Optimizer::nag;
  double lr_init = 1e-3;
  int batch_size = 64;
  int epochs = 1;
  int warmup_epochs = 5;
  double label_smoothing_eps = 0.1;
  std::uint64_t seed = 0;
  Regime regime = Regime::setup1_clean;

  void validate() const;
};

/// One training-curve row. The metric column means top-1 accuracy for
/// classifier and calibration fits, PSNR in dB (from the pooled MSE) for the
/// denoiser, and negative mean absolute error for the estimator, so that
/// higher is better for every module and best-epoch selection is uniform.
struct EpochRow {
  int epoch = 0;
  std::string split;  // "train" | "val"
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Outcome of one fit. The trained network argument is left holding the
/// weights of the best validation epoch; initial_val_* record the evaluation
/// before any optimizer step (epoch-0 baseline).
struct FitResult {
  std::vector<EpochRow> curves;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  double best_val_metric = 0.0;
  double initial_val_loss = 0.0;
  double initial_val_metric = 0.0;
  std::string checkpoint_path;  // set only when out_dir was given
  std::string curves_path;
  std::string manifest_path;
};

/// Curves persist as "epoch,split,loss,accuracy" CSV with full double
/// precision, so read_curves_csv round-trips the written values exactly.
void write_curves_csv(const std::vector<EpochRow>& rows, const std::string& path);
std::vector<EpochRow> read_curves_csv(const std::string& path);

/// Trains the full backbone (head re-initialized Xavier, zero bias) under a
/// setup1/2/3 regime with label-smoothed cross entropy and the warmup/cosine
/// schedule. setup3 requires a residual-mode restorer. Per-image degradation
/// draws come from per-(epoch, index) streams of cfg.seed; validation
/// degradation is fixed per index so the val set is identical across epochs.
/// Validation loss uses the same smoothed objective as training. When
/// out_dir is non-empty, writes checkpoint.fidc, curves.csv, manifest.json.
/// Aborts with a diagnostic if the training loss turns non-finite.
FitResult fit_classifier(const imaging::LoadedDataset& data, const imaging::PreprocessConfig& pp,
                         const TrainConfig& cfg, calib::Backbone& net,
                         restore::Denoiser* restorer = nullptr, const std::string& out_dir = "");

/// Trains the residual denoiser on overlapping patches of the train images,
/// minimizing the l1 distance between unclipped predictions and clean
/// patches. Every patch is degraded with a fresh mixture sigma each epoch;
/// validation patches keep a fixed degradation.
FitResult train_denoiser(const imaging::LoadedDataset& data, const TrainConfig& cfg,
                         restore::Denoiser& net, int patch, int stride,
                         const std::string& out_dir = "");

/// Trains the fidelity estimator head with the denoiser recipe: the input is
/// the degraded patch, the target is the per-pixel channel-mean distance map
/// between the clean patch and the frozen restorer's output.
FitResult train_estimator(const imaging::LoadedDataset& data, const TrainConfig& cfg,
                          restore::Denoiser& net, restore::Denoiser& restorer,
                          fidelity::Metric metric, int patch, int stride,
                          const std::string& out_dir = "");

/// Trains the calibration modules of `model` (backbone frozen) on mixed-level
/// degraded-then-restored images under a calib_* regime. Fidelity maps are
/// oracle distance maps, frozen-estimator predictions, or fine-tuned
/// estimator predictions depending on the regime; l1/l2 maps are
/// standardized with `stats` before entering the model (cosine maps pass
/// through unnormalized). The estimator argument is required for the
/// estimator regimes and is fed the degraded (pre-restoration) images.
/// calib_end2end also steps the estimator parameters and saves
/// estimator.fidc beside the calibration checkpoint.
FitResult fit_calibration(const imaging::LoadedDataset& data,
                          const imaging::PreprocessConfig& pp, const TrainConfig& cfg,
                          calib::CalibratedModel& model, restore::Denoiser& restorer,
                          restore::Denoiser* estimator, const fidelity::NoiseMixtureStats& stats,
                          fidelity::Metric metric, const std::string& out_dir = "");

}  // namespace fidcal::train
