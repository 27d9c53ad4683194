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

#include "fidcal/degrade/degrade.hpp"
#include "fidcal/exp/experiment.hpp"
#include "fidcal/exp/synth.hpp"
#include "fidcal/io/text.hpp"
#include "fidcal/rng.hpp"
#include "nlohmann/json.hpp"

namespace fidcal::exp {
namespace {

namespace fs = std::filesystem;

// Stage indices for deriving independent training seeds from the plan seed.
enum Stage : std::uint64_t {
  kStageBackboneInit = 0,
  kStageSetup1 = 1,
  kStageSetup2 = 2,
  kStageSetup3 = 3,
  kStageDenoiser = 4,
  kStageEstimator = 5,
  kStageCalib = 6,
  kStageCalibInit = 7,
};

std::uint64_t stage_seed(const ExperimentPlan& plan, Stage stage) {
  return Rng::stream(plan.seed, {stream_tag::kStage, static_cast<std::uint64_t>(stage)})
      .next_u64();
}

std::uint64_t classifier_stage(train::Regime regime) {
  switch (regime) {
    case train::Regime::setup1_clean: return kStageSetup1;
    case train::Regime::setup2_degraded: return kStageSetup2;
    case train::Regime::setup3_restored: return kStageSetup3;
    default: throw Error("classifier stage requires a setup regime");
  }
}

bool file_exists(const std::string& path) { return fs::exists(path); }

std::string checkpoint_in(const std::string& dir) {
  return (fs::path(dir) / "checkpoint.fidc").string();
}

}  // namespace

std::string corpus_dir(const ExperimentPlan& plan) {
  if (!plan.dataset_root.empty()) return plan.dataset_root;
  return (fs::path(plan.artifact_dir) / "corpus").string();
}

std::string split_manifest_path(const ExperimentPlan& plan) {
  return (fs::path(plan.artifact_dir) / "split.tsv").string();
}

std::string classifier_dir(const ExperimentPlan& plan, train::Regime regime) {
  return (fs::path(plan.artifact_dir) / ("classifier_" + train::to_string(regime))).string();
}

std::string denoiser_dir(const ExperimentPlan& plan) {
  return (fs::path(plan.artifact_dir) / "denoiser").string();
}

std::string estimator_dir(const ExperimentPlan& plan) {
  return (fs::path(plan.artifact_dir) / "estimator").string();
}

std::string calibration_dir(const ExperimentPlan& plan, train::Regime regime, bool ensemble,
                            const std::string& variant) {
  FIDCAL_CHECK(train::is_calib_regime(regime), "calibration_dir: calib regime required");
  std::string name = train::to_string(regime);
  if (ensemble) name += "_ens";
  if (!variant.empty()) name += "_" + variant;
  return (fs::path(plan.artifact_dir) / name).string();
}

imaging::LoadedDataset ensure_dataset(const ExperimentPlan& plan) {
  plan.validate();
  const std::string root = corpus_dir(plan);
  if (plan.dataset_root.empty()) {
    const std::string marker = (fs::path(root) / "corpus.json").string();
    if (!file_exists(marker)) {
      synth_corpus(root, plan.profile.synth_classes, plan.profile.synth_per_class,
                   plan.profile.synth_size, plan.seed);
      nlohmann::json j{{"classes", plan.profile.synth_classes},
                       {"per_class", plan.profile.synth_per_class},
                       {"size", plan.profile.synth_size},
                       {"seed", plan.seed}};
      io::write_text_atomic(marker, j.dump(2) + "\n");
    }
  }

  const std::string manifest = split_manifest_path(plan);
  imaging::DatasetSplit split;
  if (file_exists(manifest)) {
    split = imaging::read_manifest(manifest);
  } else {
    split = imaging::make_split(root, plan.seed, plan.profile.split);
    fs::create_directories(plan.artifact_dir);
    imaging::write_manifest(split, manifest);
  }
  return imaging::load_dataset(root, split);
}

calib::Backbone ensure_classifier(const ExperimentPlan& plan, train::Regime regime,
                                  const imaging::LoadedDataset& data) {
  const std::string dir = classifier_dir(plan, regime);
  const std::string ckpt = checkpoint_in(dir);
  if (!file_exists(ckpt)) {
    calib::Backbone net(plan.profile.backbone);
    // All three setups fine-tune from one shared starting point, the way the
    // study compares them against a single pretrained network.
    Rng init = Rng::stream(stage_seed(plan, kStageBackboneInit), {stream_tag::kInit, 0});
    net.init(init);

    train::TrainConfig tc = plan.profile.classifier_tc;
    tc.regime = regime;
    tc.seed = stage_seed(plan, static_cast<Stage>(classifier_stage(regime)));

    restore::Denoiser restorer;
    restore::Denoiser* restorer_ptr = nullptr;
    if (regime == train::Regime::setup3_restored) {
      restorer = ensure_denoiser(plan, data);
      restorer_ptr = &restorer;
    }
    train::fit_classifier(data, plan.profile.train_pp(), tc, net, restorer_ptr, dir);
  }
  return calib::load_backbone(ckpt);
}

restore::Denoiser ensure_denoiser(const ExperimentPlan& plan,
                                  const imaging::LoadedDataset& data) {
  const std::string dir = denoiser_dir(plan);
  const std::string ckpt = checkpoint_in(dir);
  if (!file_exists(ckpt)) {
    restore::Denoiser net(plan.profile.denoiser);
    Rng init = Rng::stream(stage_seed(plan, kStageDenoiser), {stream_tag::kInit, 0});
    net.init(init);
    train::TrainConfig tc = plan.profile.denoiser_tc;
    tc.regime = train::Regime::setup2_degraded;
    tc.seed = stage_seed(plan, kStageDenoiser);
    train::train_denoiser(data, tc, net, plan.profile.patch, plan.profile.stride, dir);
  }
  return restore::load_denoiser(ckpt);
}

restore::Denoiser ensure_estimator(const ExperimentPlan& plan,
                                   const imaging::LoadedDataset& data) {
  const std::string dir = estimator_dir(plan);
  const std::string ckpt = checkpoint_in(dir);
  if (!file_exists(ckpt)) {
    restore::Denoiser restorer = ensure_denoiser(plan, data);
    restore::Denoiser net(plan.profile.estimator);
    Rng init = Rng::stream(stage_seed(plan, kStageEstimator), {stream_tag::kInit, 0});
    net.init(init);
    train::TrainConfig tc = plan.profile.estimator_tc;
    tc.regime = train::Regime::setup2_degraded;
    tc.seed = stage_seed(plan, kStageEstimator);
    train::train_estimator(data, tc, net, restorer, plan.profile.metric, plan.profile.patch,
                           plan.profile.stride, dir);
  }
  return restore::load_denoiser(ckpt, fidelity::kEstimatorKind);
}

calib::CalibratedModel ensure_calibration(const ExperimentPlan& plan, train::Regime regime,
                                          bool ensemble, const imaging::LoadedDataset& data,
                                          const calib::CalibConfig& cfg,
                                          fidelity::Metric metric, const std::string& variant) {
  const std::string dir = calibration_dir(plan, regime, ensemble, variant);
  const std::string ckpt = checkpoint_in(dir);
  calib::Backbone backbone = ensure_classifier(plan, train::Regime::setup1_clean, data);
  if (!file_exists(ckpt)) {
    restore::Denoiser restorer = ensure_denoiser(plan, data);
    restorer.set_train_mode(false);
    restorer.set_trainable(false);

    calib::CalibConfig run_cfg = cfg;
    run_cfg.ensemble = ensemble;
    calib::CalibratedModel model(backbone, run_cfg);
    Rng init = Rng::stream(stage_seed(plan, kStageCalibInit), {stream_tag::kInit, 0});
    model.init(init);

    train::TrainConfig tc = plan.profile.calib_tc;
    tc.regime = regime;
    tc.seed = stage_seed(plan, kStageCalib);

    const fidelity::NoiseMixtureStats stats =
        fidelity::mixture_stats(degrade::mixture_levels(), true);

    restore::Denoiser estimator;
    restore::Denoiser* estimator_ptr = nullptr;
    if (regime != train::Regime::calib_oracle) {
      estimator = ensure_estimator(plan, data);
      estimator_ptr = &estimator;
    }
    train::fit_calibration(data, plan.profile.train_pp(), tc, model, restorer, estimator_ptr,
                           stats, metric, dir);
  }
  return calib::load_calibration(ckpt, backbone);
}

}  // namespace fidcal::exp
