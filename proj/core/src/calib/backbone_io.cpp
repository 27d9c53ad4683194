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

#include "fidcal/calib/backbone.hpp"

#include "fidcal/io/container.hpp"
#include "fidcal/io/hash.hpp"

namespace fidcal::calib {

namespace {

io::Container pack_backbone(const Backbone& net) {
  io::Container c("backbone");
  const BackboneConfig& cfg = net.config();
  c.meta()["config"] = {{"in_channels", cfg.in_channels},
                        {"num_classes", cfg.num_classes},
                        {"kernel", cfg.kernel},
                        {"batchnorm", cfg.batchnorm},
                        {"conv_widths", cfg.conv_widths},
                        {"pool_after", cfg.pool_after}};
  for (std::size_t i = 0; i < net.convs().size(); ++i) {
    c.add("conv" + std::to_string(i) + ".w", net.convs()[i].weight().value);
    c.add("conv" + std::to_string(i) + ".b", net.convs()[i].bias().value);
  }
  for (std::size_t i = 0; i < net.bns().size(); ++i) {
    const std::string p = "bn" + std::to_string(i);
    c.add(p + ".gamma", net.bns()[i].gamma().value);
    c.add(p + ".beta", net.bns()[i].beta().value);
    c.add(p + ".running_mean", net.bns()[i].running_mean());
    c.add(p + ".running_var", net.bns()[i].running_var());
  }
  c.add("head.w", net.head().weight().value);
  c.add("head.b", net.head().bias().value);
  return c;
}

}  // namespace

void save_backbone(const Backbone& net, const std::string& path) {
  pack_backbone(net).write(path);
}

Backbone load_backbone(const std::string& path) {
  const io::Container c = io::Container::read(path);
  FIDCAL_CHECK(c.kind() == "backbone",
               "load_backbone: unexpected kind '" + c.kind() + "' in " + path);
  const auto& j = c.meta().at("config");
  BackboneConfig cfg;
  cfg.in_channels = j.at("in_channels").get<int>();
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.kernel = j.at("kernel").get<int>();
  cfg.batchnorm = j.at("batchnorm").get<bool>();
  cfg.conv_widths = j.at("conv_widths").get<std::vector<int>>();
  cfg.pool_after = j.at("pool_after").get<std::vector<int>>();

  Backbone net(cfg);
  for (std::size_t i = 0; i < net.convs().size(); ++i) {
    net.convs()[i].weight().value = c.get_f32("conv" + std::to_string(i) + ".w");
    net.convs()[i].bias().value = c.get_f32("conv" + std::to_string(i) + ".b");
  }
  for (std::size_t i = 0; i < net.bns().size(); ++i) {
    const std::string p = "bn" + std::to_string(i);
    net.bns()[i].gamma().value = c.get_f32(p + ".gamma");
    net.bns()[i].beta().value = c.get_f32(p + ".beta");
    net.bns()[i].running_mean() = c.get_f32(p + ".running_mean");
    net.bns()[i].running_var() = c.get_f32(p + ".running_var");
  }
  net.head().weight().value = c.get_f32("head.w");
  net.head().bias().value = c.get_f32("head.b");
  return net;
}

std::string backbone_content_hash(const Backbone& net) {
  const std::vector<std::uint8_t> bytes = pack_backbone(net).serialize();
  return io::sha256_hex(bytes.data(), bytes.size());
}

}  // namespace fidcal::calib
