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
#include <limits>

#include "fidcal/io/container.hpp"
#include "fidcal/restore/denoiser.hpp"

namespace fidcal::restore {

void save_denoiser(const Denoiser& net, const std::string& path, const std::string& kind) {
  io::Container c(kind);
  const DenoiserConfig& cfg = net.config();
  c.meta()["config"] = {{"depth", cfg.depth},
                        {"width", cfg.width},
                        {"kernel", cfg.kernel},
                        {"in_channels", cfg.in_channels},
                        {"out_channels", cfg.out_channels},
                        {"residual", cfg.residual},
                        {"clamp_nonneg", cfg.clamp_nonneg},
                        {"batchnorm", cfg.batchnorm}};
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
  c.write(path);
}

Denoiser load_denoiser(const std::string& path, const std::string& expect_kind) {
  const io::Container c = io::Container::read(path);
  FIDCAL_CHECK(c.kind() == expect_kind,
               "load_denoiser: expected kind '" + expect_kind + "', found '" + c.kind() +
                   "' in " + path);
  const auto& j = c.meta().at("config");
  DenoiserConfig cfg;
  cfg.depth = j.at("depth").get<int>();
  cfg.width = j.at("width").get<int>();
  cfg.kernel = j.at("kernel").get<int>();
  cfg.in_channels = j.at("in_channels").get<int>();
  cfg.out_channels = j.at("out_channels").get<int>();
  cfg.residual = j.at("residual").get<bool>();
  cfg.clamp_nonneg = j.at("clamp_nonneg").get<bool>();
  cfg.batchnorm = j.at("batchnorm").get<bool>();

  Denoiser net(cfg);
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
  return net;
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
  FIDCAL_CHECK(a.same_shape(b), "psnr: shape mismatch");
  FIDCAL_CHECK(a.size() > 0, "psnr: empty input");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

std::vector<std::pair<int, int>> patch_grid(int h, int w, int patch, int stride) {
  FIDCAL_CHECK(patch > 0 && stride > 0, "patch_grid: patch and stride must be positive");
  FIDCAL_CHECK(h >= patch && w >= patch, "patch_grid: image smaller than patch");
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y + patch <= h; y += stride)
    for (int x = 0; x + patch <= w; x += stride) out.emplace_back(y, x);
  return out;
}

}  // namespace fidcal::restore
