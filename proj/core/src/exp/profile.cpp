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

#include "fidcal/exp/profile.hpp"

namespace fidcal::exp {

imaging::PreprocessConfig Profile::train_pp() const {
  imaging::PreprocessConfig pp;
  pp.crop_size = crop_size;
  return pp;
}

imaging::PreprocessConfig Profile::eval_pp() const {
  imaging::PreprocessConfig pp;
  pp.crop_size = crop_size;
  return pp;
}

void Profile::validate() const {
  FIDCAL_CHECK(!name.empty(), "profile: name must be set");
  FIDCAL_CHECK(synth_classes >= 2, "profile: need at least two classes");
  FIDCAL_CHECK(synth_per_class >= 5, "profile: need at least five images per class");
  FIDCAL_CHECK(synth_size >= 16, "profile: synthetic images must be at least 16 pixels");
  FIDCAL_CHECK(crop_size >= 8, "profile: crop size must be at least 8 pixels");
  FIDCAL_CHECK(patch >= 8 && stride >= 1, "profile: patch/stride out of range");
  backbone.validate();
  denoiser.validate();
  estimator.validate();
  calib.validate();
  classifier_tc.validate();
  denoiser_tc.validate();
  estimator_tc.validate();
  calib_tc.validate();
}

Profile desk_profile() {
  Profile p;
  p.name = "desk";
  p.synth_classes = 12;
  p.synth_per_class = 120;
  p.synth_size = 64;
  p.crop_size = 32;

  p.backbone.in_channels = 3;
  p.backbone.num_classes = p.synth_classes;
  p.backbone.batchnorm = true;
  p.backbone.conv_widths = {32, 64, 128};
  p.backbone.pool_after = {0, 1};

  p.denoiser.depth = 6;
  p.denoiser.width = 32;
  p.denoiser.residual = true;

  p.estimator = p.denoiser;
  p.estimator.out_channels = 1;
  p.estimator.residual = false;
  p.estimator.clamp_nonneg = true;

  p.patch = 24;
  p.stride = 20;

  p.calib.spatial_hidden = 16;
  p.calib.kernel = 3;

  p.classifier_tc.optimizer = train::Optimizer::nag;
  p.classifier_tc.lr_init = 1e-3;
  p.classifier_tc.batch_size = 64;
  p.classifier_tc.epochs = 40;
  p.classifier_tc.warmup_epochs = 5;

  p.denoiser_tc.optimizer = train::Optimizer::adam;
  p.denoiser_tc.lr_init = 1e-3;
  p.denoiser_tc.batch_size = 128;
  p.denoiser_tc.epochs = 25;
  p.denoiser_tc.warmup_epochs = 5;

  p.estimator_tc = p.denoiser_tc;

  p.calib_tc.optimizer = train::Optimizer::nag;
  p.calib_tc.lr_init = 1e-3;
  p.calib_tc.batch_size = 64;
  p.calib_tc.epochs = 25;
  p.calib_tc.warmup_epochs = 5;

  return p;
}

Profile paper_profile() {
  Profile p;
  p.name = "paper";
  p.synth_classes = 256;
  p.synth_per_class = 120;
  p.synth_size = 256;
  p.crop_size = 224;

  p.backbone.in_channels = 3;
  p.backbone.num_classes = p.synth_classes;
  p.backbone.batchnorm = true;
  p.backbone.conv_widths = {64, 128, 256, 512};
  p.backbone.pool_after = {0, 1, 2};

  p.denoiser.depth = 17;
  p.denoiser.width = 64;
  p.denoiser.residual = true;

  p.estimator = p.denoiser;
  p.estimator.out_channels = 1;
  p.estimator.residual = false;
  p.estimator.clamp_nonneg = true;

  p.patch = 50;
  p.stride = 25;

  p.calib.spatial_hidden = 64;
  p.calib.kernel = 3;

  p.classifier_tc.optimizer = train::Optimizer::nag;
  p.classifier_tc.lr_init = 1e-3;
  p.classifier_tc.batch_size = 64;
  p.classifier_tc.epochs = 120;
  p.classifier_tc.warmup_epochs = 5;

  p.denoiser_tc.optimizer = train::Optimizer::adam;
  p.denoiser_tc.lr_init = 1e-4;
  p.denoiser_tc.batch_size = 128;
  p.denoiser_tc.epochs = 120;
  p.denoiser_tc.warmup_epochs = 5;

  p.estimator_tc = p.denoiser_tc;

  p.calib_tc.optimizer = train::Optimizer::nag;
  p.calib_tc.lr_init = 1e-3;
  p.calib_tc.batch_size = 64;
  p.calib_tc.epochs = 50;
  p.calib_tc.warmup_epochs = 5;

  return p;
}

Profile profile_from_string(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw Error("unknown profile: " + name + " (expected desk or paper)");
}

}  // namespace fidcal::exp
