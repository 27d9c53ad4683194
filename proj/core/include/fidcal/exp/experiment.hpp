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
#include <optional>
#include <string>
#include <vector>

#include "fidcal/calib/calibration.hpp"
#include "fidcal/exp/profile.hpp"
#include "fidcal/tensor.hpp"

namespace fidcal::exp {

/// One test-time degradation condition of the evaluation grid.
struct GridCell {
  enum class Kind { clean, uniform, varying_1d, varying_2d };
  Kind kind = Kind::clean;
  double sigma = 0.0;     // uniform level; high endpoint for varying modes
  double sigma_lo = 0.0;  // low endpoint for varying modes

  std::string label() const;
};

/// clean, sigma 0.1..0.5, then spatially varying 1D and 2D with
/// endpoints (0.5, 0).
std::vector<GridCell> full_grid();

/// clean plus the five uniform sigma levels.
std::vector<GridCell> uniform_grid();

/// One row of the experiment matrix: which trained model answers and
/// whether test images pass through the restorer first. Baseline rows pair
/// a classifier regime with restoration on/off; calibration rows always
/// restore (their pipeline is fixed) and choose the fidelity-map source by
/// regime.
struct MatrixRowSpec {
  std::string id;
  train::Regime regime = train::Regime::setup1_clean;
  bool restore = false;
  bool ensemble = false;  // calibration rows only
};

/// The twelve rows of the published accuracy table: three baseline setups
/// with and without restoration, then oracle / pretrained / end-to-end
/// calibration each with and without the ensemble module.
std::vector<MatrixRowSpec> full_matrix_rows();

/// Everything a run needs: scale preset, artifact directory, master seed,
/// and the row/cell selection.
struct ExperimentPlan {
  Profile profile;
  std::string artifact_dir;
  std::uint64_t seed = 0;
  std::vector<MatrixRowSpec> rows;
  std::vector<GridCell> grid;
  // Optional external corpus; when empty a synthetic corpus is generated
  // under the artifact directory.
  std::string dataset_root;

  void validate() const;
};

/// Convenience constructor: named profile, full rows and grid.
ExperimentPlan default_plan(const std::string& profile_name, const std::string& artifact_dir,
                            std::uint64_t seed);

struct ReportCell {
  double accuracy_pct = 0.0;
  int correct = 0;
  int total = 0;
};

/// A filled accuracy grid plus enough metadata (checkpoint hashes, seeds,
/// profile identity) to regenerate it bit-identically.
struct ExperimentReport {
  std::string title;
  std::vector<std::string> row_names;
  std::vector<std::string> cell_labels;
  std::vector<std::vector<ReportCell>> cells;  // [row][cell]
  std::string meta_json;                       // serialized run metadata

  const ReportCell& at(const std::string& row, const std::string& cell) const;
};

/// Renders the report as a fixed-width text table (rows x degradation
/// levels, accuracy in percent).
std::string render_text_table(const ExperimentReport& report);

/// Writes report.json, report.csv, and table.txt into dir.
void write_report(const ExperimentReport& report, const std::string& dir);

ExperimentReport read_report(const std::string& path);

// ---------------------------------------------------------------------------
// Artifact store: deterministic locations of every trained checkpoint under
// plan.artifact_dir, plus build-on-demand entry points. The eval operations
// never train; they fail with the command that builds the missing piece.

std::string corpus_dir(const ExperimentPlan& plan);
std::string split_manifest_path(const ExperimentPlan& plan);
std::string classifier_dir(const ExperimentPlan& plan, train::Regime regime);
std::string denoiser_dir(const ExperimentPlan& plan);
std::string estimator_dir(const ExperimentPlan& plan);
/// Calibration runs are keyed by regime, ensemble flag, and an optional
/// variant tag ("", "no_spatial_mult", "metric_l2", ...).
std::string calibration_dir(const ExperimentPlan& plan, train::Regime regime, bool ensemble,
                            const std::string& variant = "");

/// Generates the synthetic corpus and the split manifest if absent, then
/// loads every split image into memory.
imaging::LoadedDataset ensure_dataset(const ExperimentPlan& plan);

/// Trains the stage if its checkpoint is missing, then loads it.
calib::Backbone ensure_classifier(const ExperimentPlan& plan, train::Regime regime,
                                  const imaging::LoadedDataset& data);
restore::Denoiser ensure_denoiser(const ExperimentPlan& plan,
                                  const imaging::LoadedDataset& data);
restore::Denoiser ensure_estimator(const ExperimentPlan& plan,
                                   const imaging::LoadedDataset& data);
calib::CalibratedModel ensure_calibration(const ExperimentPlan& plan, train::Regime regime,
                                          bool ensemble, const imaging::LoadedDataset& data,
                                          const calib::CalibConfig& cfg,
                                          fidelity::Metric metric,
                                          const std::string& variant = "");

// ---------------------------------------------------------------------------
// Evaluation and the study operations.

/// Evaluates one matrix row over the grid on the test split. Test-time
/// degradation is seeded per image index only, so every cell perturbs an
/// image along the same noise direction at its own level and the accuracy
/// trend across levels is not confounded by resampled noise.
/// train_missing=false turns absent checkpoints into errors naming the
/// build command instead of training them.
ExperimentReport run_matrix(const ExperimentPlan& plan, bool train_missing = false);

/// Single-module removals from the oracle no-ensemble model: one training
/// and evaluation per removed module plus the full model. Valid module
/// names: spatial_mult, spatial_add, channel_mult, channel_concat,
/// residual. Removing every module at once is rejected.
ExperimentReport run_ablation(const ExperimentPlan& plan, const std::vector<std::string>& modules,
                              bool train_missing = false);

/// Reruns the oracle no-ensemble model with the studied knob swapped:
/// kind "fidelity_metric" compares l1/l2/cosine maps, kind "downsampling"
/// compares bilinear/bicubic/nearest fidelity-map resizing.
ExperimentReport study_variants(const ExperimentPlan& plan, const std::string& kind,
                                bool train_missing = false);

/// Per-neuron mean of the pooled backbone feature over the validation
/// images of one class, for each grid cell. Neurons are reported in
/// descending order of |mean(clean) - mean(most degraded cell)|.
struct ActivationReport {
  std::vector<std::string> cell_labels;
  std::vector<int> neuron_order;
  Tensor means;  // {cells, feature_dim}, columns follow neuron_order
};

ActivationReport activation_report(const ExperimentPlan& plan, int class_id, bool restore,
                                   bool train_missing = false);

/// Writes activations.csv (one row per neuron) and a line plot PNG.
void write_activation_report(const ActivationReport& report, const std::string& dir);

}  // namespace fidcal::exp
