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

#include "fidcal/fidelity/fidelity.hpp"

#include <cmath>

#include "fidcal/io/container.hpp"

namespace fidcal::fidelity {

namespace {

constexpr double kChannelCount = 3.0;

}  // namespace

std::string to_string(Metric m) {
  switch (m) {
    case Metric::l1: return "l1";
    case Metric::l2: return "l2";
    case Metric::cosine: return "cosine";
  }
  throw Error("metric: unknown value");
}

Metric metric_from_string(const std::string& s) {
  if (s == "l1") return Metric::l1;
  if (s == "l2") return Metric::l2;
  if (s == "cosine") return Metric::cosine;
  throw Error("metric: unknown name '" + s + "'");
}

FidelityMap compute_fidelity(const Tensor& restored, const Tensor& clean, Metric metric) {
  FIDCAL_CHECK(restored.same_shape(clean), "compute_fidelity: shape mismatch");
  FIDCAL_CHECK(restored.ndim() == 3 && restored.dim(0) == 3,
               "compute_fidelity: expected {3, H, W} inputs");
  const int h = restored.dim(1), w = restored.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  FidelityMap map;
  map.metric = metric;
  map.values = Tensor({1, h, w});
  const float* r = restored.data();
  const float* c = clean.data();
  float* out = map.values.data();

  for (std::size_t p = 0; p < plane; ++p) {
    if (metric == Metric::cosine) {
      double dot = 0.0, nr = 0.0, nc = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double rv = r[ch * plane + p], cv = c[ch * plane + p];
        dot += rv * cv;
        nr += rv * rv;
        nc += cv * cv;
      }
      out[p] = (nr == 0.0 || nc == 0.0)
                   ? 0.0f
                   : static_cast<float>(1.0 - dot / (std::sqrt(nr) * std::sqrt(nc)));
    } else {
      double acc = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = static_cast<double>(r[ch * plane + p]) - c[ch * plane + p];
        acc += metric == Metric::l1 ? std::fabs(d) : d * d;
      }
      out[p] = static_cast<float>(acc / kChannelCount);
    }
  }
  return map;
}

NoiseMixtureStats mixture_stats(const std::vector<double>& sigmas, bool restore_halving) {
  FIDCAL_CHECK(!sigmas.empty(), "mixture_stats: empty sigma set");
  double sum_sq = 0.0;
  for (double s : sigmas) sum_sq += s * s;
  const double n = static_cast<double>(sigmas.size());
  const double base = sum_sq / (n * n);

  NoiseMixtureStats stats;
  stats.sigma_sq = restore_halving ? base / 2.0 : base;
  stats.post_restore_sigma_sq = base / 2.0;
  const double sigma = std::sqrt(stats.sigma_sq);
  stats.half_normal_mean = sigma * std::sqrt(2.0 / M_PI);
  stats.half_normal_var = stats.sigma_sq * (1.0 - 2.0 / M_PI);
  stats.gamma_mean = stats.sigma_sq;
  stats.gamma_var = stats.sigma_sq * std::sqrt(2.0);
  return stats;
}

FidelityMap normalize(const FidelityMap& map, const NoiseMixtureStats& stats) {
  FIDCAL_CHECK(map.metric != Metric::cosine, "normalize: cosine maps are not normalized");
  FIDCAL_CHECK(!map.normalized, "normalize: map already normalized");

  const double model_mean =
      map.metric == Metric::l1 ? stats.half_normal_mean : stats.gamma_mean;
  const double model_var = map.metric == Metric::l1 ? stats.half_normal_var : stats.gamma_var;
  const double model_std = std::sqrt(model_var / kChannelCount);
  FIDCAL_CHECK(model_std > 0.0, "normalize: degenerate mixture statistics");

  FidelityMap out = map;
  out.normalized = true;
  out.norm_mean = model_mean;
  out.norm_std = model_std;
  const float mean = static_cast<float>(model_mean);
  const float inv_std = static_cast<float>(1.0 / model_std);
  for (auto& v : out.values.values()) v = (v - mean) * inv_std;
  return out;
}

FidelityMap estimate_fidelity(const restore::Denoiser& estimator, const Tensor& degraded) {
  const restore::DenoiserConfig& cfg = estimator.config();
  FIDCAL_CHECK(cfg.out_channels == 1 && !cfg.residual && cfg.clamp_nonneg,
               "estimate_fidelity: model is not a single-channel clamped estimator head");
  FIDCAL_CHECK(degraded.ndim() == 3 && degraded.dim(0) == cfg.in_channels,
               "estimate_fidelity: input shape does not match the estimator");

  bool any_nonzero = false;
  for (float v : estimator.convs().front().weight().value.values())
    if (v != 0.0f) {
      any_nonzero = true;
      break;
    }
  FIDCAL_CHECK(any_nonzero, "estimate_fidelity: estimator has no trained weights");

  restore::Denoiser worker = estimator;
  worker.set_train_mode(false);
  Tensor batch = degraded;
  batch.reshape({1, degraded.dim(0), degraded.dim(1), degraded.dim(2)});
  Tensor raw = worker.forward_raw(batch);
  raw.reshape({1, degraded.dim(1), degraded.dim(2)});

  FidelityMap map;
  map.metric = Metric::l1;
  map.values = std::move(raw);
  return map;
}

void save_fidelity_map(const FidelityMap& map, const std::string& path) {
  io::Container c("fidelity_map");
  c.meta()["metric"] = to_string(map.metric);
  c.meta()["normalized"] = map.normalized;
  c.meta()["norm_mean"] = map.norm_mean;
  c.meta()["norm_std"] = map.norm_std;
  c.add("values", map.values);
  c.write(path);
}

FidelityMap load_fidelity_map(const std::string& path) {
  const io::Container c = io::Container::read(path);
  FIDCAL_CHECK(c.kind() == "fidelity_map",
               "load_fidelity_map: unexpected kind '" + c.kind() + "' in " + path);
  FidelityMap map;
  map.metric = metric_from_string(c.meta().at("metric").get<std::string>());
  map.normalized = c.meta().at("normalized").get<bool>();
  map.norm_mean = c.meta().at("norm_mean").get<double>();
  map.norm_std = c.meta().at("norm_std").get<double>();
  map.values = c.get_f32("values");
  FIDCAL_CHECK(map.values.ndim() == 3 && map.values.dim(0) == 1,
               "load_fidelity_map: values are not a single-channel map");
  return map;
}

}  // namespace fidcal::fidelity
