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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "../train/common.hpp"
#include "fidcal/degrade/degrade.hpp"
#include "fidcal/exp/experiment.hpp"
#include "fidcal/imaging/codec.hpp"
#include "fidcal/io/hash.hpp"
#include "fidcal/io/text.hpp"
#include "fidcal/nn/losses.hpp"
#include "nlohmann/json.hpp"
#include "plot.hpp"

namespace fidcal::exp {
namespace {

namespace fs = std::filesystem;

constexpr int kEvalBatch = 64;

bool file_exists(const std::string& path) { return fs::exists(path); }

std::string checkpoint_in(const std::string& dir) {
  return (fs::path(dir) / "checkpoint.fidc").string();
}

std::string plan_flags(const ExperimentPlan& plan) {
  return " --profile " + plan.profile.name + " --seed " + std::to_string(plan.seed) + " --out " +
         plan.artifact_dir;
}

std::string missing_msg(const std::string& ckpt, const std::string& build_cmd) {
  return "missing checkpoint " + ckpt + "; build it with: " + build_cmd;
}

calib::Backbone need_classifier(const ExperimentPlan& plan, train::Regime regime,
                                const imaging::LoadedDataset& data, bool train_missing) {
  const std::string ckpt = checkpoint_in(classifier_dir(plan, regime));
  if (file_exists(ckpt)) return calib::load_backbone(ckpt);
  if (train_missing) return ensure_classifier(plan, regime, data);
  throw Error(missing_msg(ckpt, "fidcal train-classifier" + plan_flags(plan) + " --regime " +
                                    train::to_string(regime)));
}

restore::Denoiser need_denoiser(const ExperimentPlan& plan, const imaging::LoadedDataset& data,
                                bool train_missing) {
  const std::string ckpt = checkpoint_in(denoiser_dir(plan));
  if (file_exists(ckpt)) return restore::load_denoiser(ckpt);
  if (train_missing) return ensure_denoiser(plan, data);
  throw Error(missing_msg(ckpt, "fidcal train-restorer" + plan_flags(plan)));
}

restore::Denoiser need_estimator(const ExperimentPlan& plan, const imaging::LoadedDataset& data,
                                 bool train_missing) {
  const std::string ckpt = checkpoint_in(estimator_dir(plan));
  if (file_exists(ckpt)) return restore::load_denoiser(ckpt, fidelity::kEstimatorKind);
  if (train_missing) return ensure_estimator(plan, data);
  throw Error(missing_msg(ckpt, "fidcal train-estimator" + plan_flags(plan)));
}

calib::CalibratedModel need_calibration(const ExperimentPlan& plan, train::Regime regime,
                                        bool ensemble, const imaging::LoadedDataset& data,
                                        const calib::CalibConfig& cfg, fidelity::Metric metric,
                                        const std::string& variant, bool train_missing,
                                        const std::string& build_cmd) {
  const std::string ckpt = checkpoint_in(calibration_dir(plan, regime, ensemble, variant));
  if (!file_exists(ckpt)) {
    if (!train_missing) throw Error(missing_msg(ckpt, build_cmd));
    return ensure_calibration(plan, regime, ensemble, data, cfg, metric, variant);
  }
  calib::Backbone backbone = need_classifier(plan, train::Regime::setup1_clean, data, train_missing);
  return calib::load_calibration(ckpt, backbone);
}

/// One evaluation-ready row: the answering model plus everything its
/// fidelity-map source needs, with standardization constants precomputed.
struct PreparedRow {
  MatrixRowSpec spec;
  std::optional<calib::Backbone> baseline;
  std::optional<calib::CalibratedModel> model;
  std::optional<restore::Denoiser> estimator;
  std::string estimator_key;  // checkpoint path; rows sharing it share outputs
  std::string estimator_ckpt;
  fidelity::Metric metric = fidelity::Metric::l1;
  bool standardize = true;
  float norm_mean = 0.0f;
  float norm_inv_std = 1.0f;
  std::string ckpt;
};

void set_standardization(PreparedRow& row, const fidelity::NoiseMixtureStats& stats) {
  row.standardize = row.metric != fidelity::Metric::cosine;
  if (!row.standardize) return;
  const double model_mean = row.metric == fidelity::Metric::l1 ? stats.half_normal_mean
                                                               : stats.gamma_mean;
  const double model_var =
      row.metric == fidelity::Metric::l1 ? stats.half_normal_var : stats.gamma_var;
  const double model_std = std::sqrt(model_var / 3.0);
  FIDCAL_CHECK(model_std > 0.0, "evaluate: degenerate mixture statistics");
  row.norm_mean = static_cast<float>(model_mean);
  row.norm_inv_std = static_cast<float>(1.0 / model_std);
}

PreparedRow prepare_row(const ExperimentPlan& plan, const imaging::LoadedDataset& data,
                        const MatrixRowSpec& spec, const calib::CalibConfig& cfg,
                        fidelity::Metric metric, const std::string& variant, bool train_missing,
                        const std::string& build_cmd) {
  PreparedRow row;
  row.spec = spec;
  row.metric = metric;
  set_standardization(row, fidelity::mixture_stats(degrade::mixture_levels(), true));

  if (!train::is_calib_regime(spec.regime)) {
    row.baseline = need_classifier(plan, spec.regime, data, train_missing);
    row.baseline->set_train_mode(false);
    row.ckpt = checkpoint_in(classifier_dir(plan, spec.regime));
    return row;
  }

  row.model = need_calibration(plan, spec.regime, spec.ensemble, data, cfg, metric, variant,
                               train_missing, build_cmd);
  row.ckpt = checkpoint_in(calibration_dir(plan, spec.regime, spec.ensemble, variant));

  if (spec.regime == train::Regime::calib_pretrained) {
    row.estimator = need_estimator(plan, data, train_missing);
    row.estimator_ckpt = checkpoint_in(estimator_dir(plan));
  } else if (spec.regime == train::Regime::calib_end2end) {
    // End-to-end calibration fine-tunes its own copy of the estimator and
    // saves it next to the calibration checkpoint.
    const std::string path =
        (fs::path(calibration_dir(plan, spec.regime, spec.ensemble, variant)) / "estimator.fidc")
            .string();
    if (!file_exists(path))
      throw Error(missing_msg(path, build_cmd));
    row.estimator = restore::load_denoiser(path, fidelity::kEstimatorKind);
    row.estimator_ckpt = path;
  }
  if (row.estimator) {
    row.estimator->set_train_mode(false);
    row.estimator_key = row.estimator_ckpt;
  }
  return row;
}

std::string rel_to_artifacts(const ExperimentPlan& plan, const std::string& path) {
  return fs::path(path).lexically_relative(plan.artifact_dir).generic_string();
}

Tensor degrade_batch(const std::vector<Tensor>& clean_items, const std::vector<int>& indices,
                     const GridCell& cell, std::uint64_t seed) {
  std::vector<Tensor> out;
  out.reserve(clean_items.size());
  for (std::size_t i = 0; i < clean_items.size(); ++i) {
    degrade::DegradationSpec spec;
    spec.kind = degrade::Kind::awgn;
    switch (cell.kind) {
      case GridCell::Kind::clean:
        out.push_back(clean_items[i]);
        continue;
      case GridCell::Kind::uniform:
        spec.variation = degrade::Variation::uniform;
        spec.level = cell.sigma;
        break;
      case GridCell::Kind::varying_1d:
        spec.variation = degrade::Variation::varying_1d;
        spec.level_hi = cell.sigma;
        spec.level_lo = cell.sigma_lo;
        break;
      case GridCell::Kind::varying_2d:
        spec.variation = degrade::Variation::varying_2d;
        spec.level_hi = cell.sigma;
        spec.level_lo = cell.sigma_lo;
        break;
    }
    // Seeded by image index alone: every cell perturbs an image along the
    // same noise direction at its own amplitude, so accuracy differences
    // across levels measure the level, not a noise resample.
    spec.seed = Rng::stream(seed, {stream_tag::kEval,
                                   static_cast<std::uint64_t>(indices[i])})
                    .next_u64();
    out.push_back(degrade::awgn(clean_items[i], spec).first);
  }
  return train::internal::stack_batch(out);
}

ExperimentReport evaluate_rows(const ExperimentPlan& plan, const imaging::LoadedDataset& data,
                               std::vector<PreparedRow>& rows, const std::string& title,
                               bool train_missing) {
  FIDCAL_CHECK(!rows.empty(), "evaluate: no rows");
  FIDCAL_CHECK(!data.test_images.empty(), "evaluate: empty test split");
  const imaging::PreprocessConfig pp = plan.profile.eval_pp();
  const fidelity::NoiseMixtureStats stats =
      fidelity::mixture_stats(degrade::mixture_levels(), true);

  const bool any_restore =
      std::any_of(rows.begin(), rows.end(), [](const PreparedRow& r) { return r.spec.restore; });
  std::set<fidelity::Metric> oracle_metrics;
  for (const PreparedRow& r : rows)
    if (r.spec.regime == train::Regime::calib_oracle) oracle_metrics.insert(r.metric);

  std::optional<restore::Denoiser> restorer;
  if (any_restore) {
    restorer = need_denoiser(plan, data, train_missing);
    restorer->set_train_mode(false);
  }

  const int n_test = static_cast<int>(data.test_images.size());
  std::vector<int> order(n_test);
  for (int i = 0; i < n_test; ++i) order[i] = i;

  std::vector<std::vector<int>> correct(rows.size(), std::vector<int>(plan.grid.size(), 0));

  for (const std::vector<int>& chunk : train::internal::make_batches(order, kEvalBatch)) {
    std::vector<Tensor> clean_items;
    std::vector<int> labels;
    clean_items.reserve(chunk.size());
    for (int idx : chunk) {
      clean_items.push_back(imaging::preprocess_eval(data.test_images[idx], pp));
      labels.push_back(data.test_labels[idx]);
    }

    for (std::size_t ci = 0; ci < plan.grid.size(); ++ci) {
      const GridCell& cell = plan.grid[ci];
      const Tensor degraded01 = degrade_batch(clean_items, chunk, cell, plan.seed);

      std::optional<Tensor> restored01;
      if (any_restore) restored01 = restorer->denoise_batch(degraded01);

      std::optional<Tensor> x_deg, x_res;
      const auto input_for = [&](bool restore) -> const Tensor& {
        std::optional<Tensor>& slot = restore ? x_res : x_deg;
        if (!slot) {
          slot = restore ? *restored01 : degraded01;
          train::internal::normalize_batch_inplace(*slot, pp);
        }
        return *slot;
      };

      std::map<fidelity::Metric, Tensor> oracle_fid;
      for (fidelity::Metric m : oracle_metrics) {
        std::vector<Tensor> maps;
        maps.reserve(clean_items.size());
        for (std::size_t i = 0; i < clean_items.size(); ++i) {
          const Tensor r = train::internal::batch_item(*restored01, static_cast<int>(i));
          fidelity::FidelityMap fm = fidelity::compute_fidelity(r, clean_items[i], m);
          if (m != fidelity::Metric::cosine) fm = fidelity::normalize(fm, stats);
          maps.push_back(std::move(fm.values));
        }
        oracle_fid.emplace(m, train::internal::stack_batch(maps));
      }

      std::map<std::string, Tensor> estimator_raw;

      for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        PreparedRow& row = rows[ri];
        const Tensor& x = input_for(row.spec.restore);

        Tensor logits;
        if (row.baseline) {
          logits = row.baseline->forward(x);
        } else {
          Tensor fid;
          if (row.spec.regime == train::Regime::calib_oracle) {
            fid = oracle_fid.at(row.metric);
          } else {
            auto it = estimator_raw.find(row.estimator_key);
            if (it == estimator_raw.end())
              it = estimator_raw.emplace(row.estimator_key, row.estimator->forward_raw(degraded01))
                       .first;
            fid = it->second;
            if (row.standardize)
              for (auto& v : fid.values()) v = (v - row.norm_mean) * row.norm_inv_std;
          }
          logits = row.model->forward(x, fid);
        }

        for (std::size_t i = 0; i < labels.size(); ++i)
          if (nn::argmax_row(logits, static_cast<int>(i)) == labels[i]) ++correct[ri][ci];
      }
    }
  }

  ExperimentReport report;
  report.title = title;
  for (const PreparedRow& row : rows) report.row_names.push_back(row.spec.id);
  for (const GridCell& cell : plan.grid) report.cell_labels.push_back(cell.label());
  report.cells.resize(rows.size());
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    report.cells[ri].resize(plan.grid.size());
    for (std::size_t ci = 0; ci < plan.grid.size(); ++ci) {
      ReportCell& c = report.cells[ri][ci];
      c.correct = correct[ri][ci];
      c.total = n_test;
      c.accuracy_pct = 100.0 * c.correct / c.total;
    }
  }

  nlohmann::json meta;
  meta["profile"] = plan.profile.name;
  meta["seed"] = plan.seed;
  meta["test_images"] = n_test;
  nlohmann::json ckpts = nlohmann::json::object();
  nlohmann::json estimators = nlohmann::json::object();
  for (const PreparedRow& row : rows) {
    ckpts[row.spec.id] = {{"file", rel_to_artifacts(plan, row.ckpt)},
                          {"sha256", io::sha256_file(row.ckpt)}};
    if (row.estimator)
      estimators[row.spec.id] = {{"file", rel_to_artifacts(plan, row.estimator_ckpt)},
                                 {"sha256", io::sha256_file(row.estimator_ckpt)}};
  }
  meta["checkpoints"] = std::move(ckpts);
  if (!estimators.empty()) meta["estimators"] = std::move(estimators);
  if (any_restore) {
    const std::string dk = checkpoint_in(denoiser_dir(plan));
    meta["restorer"] = {{"file", rel_to_artifacts(plan, dk)}, {"sha256", io::sha256_file(dk)}};
  }
  report.meta_json = meta.dump();
  return report;
}

const std::vector<std::string>& removable_modules() {
  static const std::vector<std::string> names = {"spatial_mult", "spatial_add", "channel_mult",
                                                 "channel_concat", "residual"};
  return names;
}

calib::CalibConfig apply_removal(const calib::CalibConfig& base, const std::string& module) {
  calib::CalibConfig cfg = base;
  if (module == "spatial_mult")
    cfg.spatial_mult = false;
  else if (module == "spatial_add")
    cfg.spatial_add = false;
  else if (module == "channel_mult")
    cfg.channel_mult = false;
  else if (module == "channel_concat")
    cfg.channel_concat = false;
  else if (module == "residual")
    cfg.residual = false;
  else
    throw Error("unknown calibration module '" + module + "'");
  FIDCAL_CHECK(cfg.spatial_enabled() || cfg.channel_feature_needed(),
               "removing '" + module + "' leaves no calibration module enabled");
  return cfg;
}

}  // namespace

ExperimentReport run_matrix(const ExperimentPlan& plan, bool train_missing) {
  plan.validate();
  const imaging::LoadedDataset data = ensure_dataset(plan);

  std::vector<PreparedRow> rows;
  rows.reserve(plan.rows.size());
  for (const MatrixRowSpec& spec : plan.rows) {
    std::string cmd = "fidcal train-calib" + plan_flags(plan) + " --regime " +
                      train::to_string(spec.regime);
    if (spec.ensemble) cmd += " --ensemble";
    rows.push_back(prepare_row(plan, data, spec, plan.profile.calib, plan.profile.metric, "",
                               train_missing, cmd));
  }
  return evaluate_rows(plan, data, rows, "experiment matrix (" + plan.profile.name + ")",
                       train_missing);
}

ExperimentReport run_ablation(const ExperimentPlan& plan, const std::vector<std::string>& modules,
                              bool train_missing) {
  plan.validate();
  FIDCAL_CHECK(!modules.empty(), "ablation: at least one module to remove");
  for (const std::string& m : modules) {
    FIDCAL_CHECK(std::count(modules.begin(), modules.end(), m) == 1,
                 "ablation: module '" + m + "' listed twice");
    FIDCAL_CHECK(std::find(removable_modules().begin(), removable_modules().end(), m) !=
                     removable_modules().end(),
                 "ablation: unknown module '" + m + "'");
  }
  const imaging::LoadedDataset data = ensure_dataset(plan);
  const std::string cmd = "fidcal ablate" + plan_flags(plan) + " --train-missing";

  std::vector<PreparedRow> rows;
  const MatrixRowSpec base{"full", train::Regime::calib_oracle, true, false};
  rows.push_back(
      prepare_row(plan, data, base, plan.profile.calib, plan.profile.metric, "", train_missing, cmd));
  for (const std::string& m : modules) {
    MatrixRowSpec spec = base;
    spec.id = "no_" + m;
    rows.push_back(prepare_row(plan, data, spec, apply_removal(plan.profile.calib, m),
                               plan.profile.metric, spec.id, train_missing, cmd));
  }

  ExperimentReport report =
      evaluate_rows(plan, data, rows, "module ablation (" + plan.profile.name + ")", train_missing);

  nlohmann::json meta = nlohmann::json::parse(report.meta_json);
  nlohmann::json deltas = nlohmann::json::object();
  for (std::size_t ri = 1; ri < report.row_names.size(); ++ri) {
    std::vector<double> row;
    for (std::size_t ci = 0; ci < report.cell_labels.size(); ++ci)
      row.push_back(report.cells[0][ci].accuracy_pct - report.cells[ri][ci].accuracy_pct);
    deltas[report.row_names[ri]] = row;
  }
  meta["deltas_vs_full"] = std::move(deltas);
  report.meta_json = meta.dump();
  return report;
}

ExperimentReport study_variants(const ExperimentPlan& plan, const std::string& kind,
                                bool train_missing) {
  plan.validate();
  const imaging::LoadedDataset data = ensure_dataset(plan);
  const std::string cmd =
      "fidcal variants" + plan_flags(plan) + " --kind " + kind + " --train-missing";

  std::vector<PreparedRow> rows;
  std::string title;
  if (kind == "fidelity_metric") {
    title = "fidelity metric variants (" + plan.profile.name + ")";
    for (fidelity::Metric m :
         {fidelity::Metric::l1, fidelity::Metric::l2, fidelity::Metric::cosine}) {
      MatrixRowSpec spec{"metric_" + fidelity::to_string(m), train::Regime::calib_oracle, true,
                         false};
      const std::string variant = m == plan.profile.metric ? "" : spec.id;
      rows.push_back(
          prepare_row(plan, data, spec, plan.profile.calib, m, variant, train_missing, cmd));
    }
  } else if (kind == "downsampling") {
    title = "fidelity downsampling variants (" + plan.profile.name + ")";
    for (imaging::Resample r :
         {imaging::Resample::bilinear, imaging::Resample::bicubic, imaging::Resample::nearest}) {
      MatrixRowSpec spec{"resample_" + imaging::to_string(r), train::Regime::calib_oracle, true,
                         false};
      const std::string variant = r == plan.profile.calib.resample ? "" : spec.id;
      calib::CalibConfig cfg = plan.profile.calib;
      cfg.resample = r;
      rows.push_back(
          prepare_row(plan, data, spec, cfg, plan.profile.metric, variant, train_missing, cmd));
    }
  } else {
    throw Error("unknown variant study '" + kind +
                "'; expected fidelity_metric or downsampling");
  }
  return evaluate_rows(plan, data, rows, title, train_missing);
}

ActivationReport activation_report(const ExperimentPlan& plan, int class_id, bool restore,
                                   bool train_missing) {
  plan.validate();
  const imaging::LoadedDataset data = ensure_dataset(plan);
  FIDCAL_CHECK(class_id >= 0 && class_id < data.num_classes(),
               "activation report: class id out of range");

  std::vector<int> indices;
  for (std::size_t i = 0; i < data.val_labels.size(); ++i)
    if (data.val_labels[i] == class_id) indices.push_back(static_cast<int>(i));
  FIDCAL_CHECK(!indices.empty(), "activation report: class " + std::to_string(class_id) +
                                     " has no validation images");

  calib::Backbone backbone =
      need_classifier(plan, train::Regime::setup1_clean, data, train_missing);
  backbone.set_train_mode(false);
  std::optional<restore::Denoiser> restorer;
  if (restore) {
    restorer = need_denoiser(plan, data, train_missing);
    restorer->set_train_mode(false);
  }

  const imaging::PreprocessConfig pp = plan.profile.eval_pp();
  std::vector<Tensor> clean_items;
  clean_items.reserve(indices.size());
  for (int idx : indices) clean_items.push_back(imaging::preprocess_eval(data.val_images[idx], pp));

  const int c = backbone.feature_dim();
  const int n_cells = static_cast<int>(plan.grid.size());
  Tensor raw_means({n_cells, c});
  for (int ci = 0; ci < n_cells; ++ci) {
    Tensor batch01 = degrade_batch(clean_items, indices, plan.grid[ci], plan.seed);
    if (restorer) batch01 = restorer->denoise_batch(batch01);
    train::internal::normalize_batch_inplace(batch01, pp);
    const Tensor feats = backbone.features(batch01);
    for (int j = 0; j < c; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < indices.size(); ++i)
        acc += feats[i * static_cast<std::size_t>(c) + j];
      raw_means[static_cast<std::size_t>(ci) * c + j] =
          static_cast<float>(acc / static_cast<double>(indices.size()));
    }
  }

  int clean_cell = 0;
  for (int ci = 0; ci < n_cells; ++ci)
    if (plan.grid[ci].kind == GridCell::Kind::clean) {
      clean_cell = ci;
      break;
    }
  int degraded_cell = n_cells - 1;
  double worst = -1.0;
  for (int ci = 0; ci < n_cells; ++ci)
    if (plan.grid[ci].kind == GridCell::Kind::uniform && plan.grid[ci].sigma > worst) {
      worst = plan.grid[ci].sigma;
      degraded_cell = ci;
    }

  ActivationReport report;
  for (const GridCell& cell : plan.grid) report.cell_labels.push_back(cell.label());
  report.neuron_order.resize(c);
  for (int j = 0; j < c; ++j) report.neuron_order[j] = j;
  std::sort(report.neuron_order.begin(), report.neuron_order.end(), [&](int a, int b) {
    const auto mean_at = [&](int cell, int j) {
      return raw_means[static_cast<std::size_t>(cell) * c + j];
    };
    const double da = std::abs(mean_at(clean_cell, a) - mean_at(degraded_cell, a));
    const double db = std::abs(mean_at(clean_cell, b) - mean_at(degraded_cell, b));
    if (da != db) return da > db;
    return a < b;
  });

  report.means = Tensor({n_cells, c});
  for (int ci = 0; ci < n_cells; ++ci)
    for (int k = 0; k < c; ++k)
      report.means[static_cast<std::size_t>(ci) * c + k] =
          raw_means[static_cast<std::size_t>(ci) * c + report.neuron_order[k]];
  return report;
}

void write_activation_report(const ActivationReport& report, const std::string& dir) {
  FIDCAL_CHECK(report.means.ndim() == 2, "activation report: means must be {cells, neurons}");
  const int n_cells = report.means.dim(0);
  const int c = report.means.dim(1);
  FIDCAL_CHECK(n_cells == static_cast<int>(report.cell_labels.size()) &&
                   c == static_cast<int>(report.neuron_order.size()),
               "activation report: inconsistent shapes");
  fs::create_directories(dir);

  std::string csv = "neuron";
  for (const std::string& label : report.cell_labels) csv += "," + label;
  csv += "\n";
  for (int k = 0; k < c; ++k) {
    csv += std::to_string(report.neuron_order[k]);
    for (int ci = 0; ci < n_cells; ++ci) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), ",%.17g",
                    static_cast<double>(report.means[static_cast<std::size_t>(ci) * c + k]));
      csv += buf;
    }
    csv += "\n";
  }
  io::write_text_atomic((fs::path(dir) / "activations.csv").string(), csv);

  std::vector<internal::PlotSeries> series;
  for (int ci = 0; ci < n_cells; ++ci) {
    internal::PlotSeries s;
    s.label = report.cell_labels[ci];
    s.ys.reserve(c);
    for (int k = 0; k < c; ++k)
      s.ys.push_back(report.means[static_cast<std::size_t>(ci) * c + k]);
    series.push_back(std::move(s));
  }
  imaging::encode_png((fs::path(dir) / "activations.png").string(),
                      internal::render_line_plot(series));
}

}  // namespace fidcal::exp
