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

#include "fidcal/calib/calibration.hpp"

#include <string>

#include "fidcal/io/container.hpp"

namespace fidcal::calib {

namespace {

std::string site_prefix(int i) { return "site" + std::to_string(i); }

}  // namespace

void save_calibration(const CalibratedModel& model, const std::string& path) {
  const CalibConfig& cfg = model.config();
  io::Container c("calibration");
  c.meta()["config"] = {{"spatial_hidden", cfg.spatial_hidden},
                        {"channel_hidden", cfg.channel_hidden},
                        {"kernel", cfg.kernel},
                        {"spatial_mult", cfg.spatial_mult},
                        {"spatial_add", cfg.spatial_add},
                        {"channel_mult", cfg.channel_mult},
                        {"channel_concat", cfg.channel_concat},
                        {"residual", cfg.residual},
                        {"ensemble", cfg.ensemble},
                        {"resample", imaging::to_string(cfg.resample)}};
  c.meta()["backbone_hash"] = backbone_content_hash(model.backbone());
  c.meta()["feature_dim"] = model.feature_dim();
  c.meta()["num_sites"] = model.num_sites();

  for (int i = 0; i < model.num_sites(); ++i) {
    const SpatialBlock<float>& site = model.sites()[static_cast<std::size_t>(i)];
    const std::string p = site_prefix(i);
    for (int j = 0; j < 3; ++j) {
      c.add(p + ".gate.conv" + std::to_string(j) + ".w", site.gate_stack().conv(j).weight().value);
      c.add(p + ".gate.conv" + std::to_string(j) + ".b", site.gate_stack().conv(j).bias().value);
      c.add(p + ".add.conv" + std::to_string(j) + ".w", site.add_stack().conv(j).weight().value);
      c.add(p + ".add.conv" + std::to_string(j) + ".b", site.add_stack().conv(j).bias().value);
    }
    c.add(p + ".s", site.s().value);
  }
  if (cfg.channel_feature_needed()) {
    c.add("channel_mult.fc1.w", model.mult_stack().fc1().weight().value);
    c.add("channel_mult.fc1.b", model.mult_stack().fc1().bias().value);
    c.add("channel_mult.fc2.w", model.mult_stack().fc2().weight().value);
    c.add("channel_mult.fc2.b", model.mult_stack().fc2().bias().value);
    c.add("channel_concat.fc1.w", model.concat_stack().fc1().weight().value);
    c.add("channel_concat.fc1.b", model.concat_stack().fc1().bias().value);
    c.add("channel_concat.fc2.w", model.concat_stack().fc2().weight().value);
    c.add("channel_concat.fc2.b", model.concat_stack().fc2().bias().value);
  }
  c.add("ensemble.params", model.ensemble_gate().value);
  c.write(path);
}

CalibratedModel load_calibration(const std::string& path, const Backbone& backbone) {
  const io::Container c = io::Container::read(path);
  FIDCAL_CHECK(c.kind() == "calibration",
               "load_calibration: unexpected kind '" + c.kind() + "' in " + path);

  const std::string want = c.meta().at("backbone_hash").get<std::string>();
  const std::string have = backbone_content_hash(backbone);
  FIDCAL_CHECK(want == have,
               "load_calibration: checkpoint was trained against a different backbone "
               "(stored hash " + want.substr(0, 12) + "..., supplied backbone " +
                   have.substr(0, 12) + "...)");

  const auto& j = c.meta().at("config");
  CalibConfig cfg;
  cfg.spatial_hidden = j.at("spatial_hidden").get<int>();
  cfg.channel_hidden = j.at("channel_hidden").get<int>();
  cfg.kernel = j.at("kernel").get<int>();
  cfg.spatial_mult = j.at("spatial_mult").get<bool>();
  cfg.spatial_add = j.at("spatial_add").get<bool>();
  cfg.channel_mult = j.at("channel_mult").get<bool>();
  cfg.channel_concat = j.at("channel_concat").get<bool>();
  cfg.residual = j.at("residual").get<bool>();
  cfg.ensemble = j.at("ensemble").get<bool>();
  cfg.resample = imaging::resample_from_string(j.at("resample").get<std::string>());

  CalibratedModel model(backbone, cfg);
  FIDCAL_CHECK(model.num_sites() == c.meta().at("num_sites").get<int>(),
               "load_calibration: insertion site count mismatch");

  for (int i = 0; i < model.num_sites(); ++i) {
    SpatialBlock<float>& site = model.sites()[static_cast<std::size_t>(i)];
    const std::string p = site_prefix(i);
    for (int j2 = 0; j2 < 3; ++j2) {
      site.gate_stack().conv(j2).weight().value =
          c.get_f32(p + ".gate.conv" + std::to_string(j2) + ".w");
      site.gate_stack().conv(j2).bias().value =
          c.get_f32(p + ".gate.conv" + std::to_string(j2) + ".b");
      site.add_stack().conv(j2).weight().value =
          c.get_f32(p + ".add.conv" + std::to_string(j2) + ".w");
      site.add_stack().conv(j2).bias().value =
          c.get_f32(p + ".add.conv" + std::to_string(j2) + ".b");
    }
    site.s().value = c.get_f32(p + ".s");
  }
  if (cfg.channel_feature_needed()) {
    model.mult_stack().fc1().weight().value = c.get_f32("channel_mult.fc1.w");
    model.mult_stack().fc1().bias().value = c.get_f32("channel_mult.fc1.b");
    model.mult_stack().fc2().weight().value = c.get_f32("channel_mult.fc2.w");
    model.mult_stack().fc2().bias().value = c.get_f32("channel_mult.fc2.b");
    model.concat_stack().fc1().weight().value = c.get_f32("channel_concat.fc1.w");
    model.concat_stack().fc1().bias().value = c.get_f32("channel_concat.fc1.b");
    model.concat_stack().fc2().weight().value = c.get_f32("channel_concat.fc2.w");
    model.concat_stack().fc2().bias().value = c.get_f32("channel_concat.fc2.b");
  }
  model.ensemble_gate().value = c.get_f32("ensemble.params");
  return model;
}

}  // namespace fidcal::calib
