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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fidcal/nn/layers.hpp"
#include "fidcal/rng.hpp"

namespace fidcal::nn {

struct GradCheckResult {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int coords_checked = 0;
  std::string worst_param;

  bool ok(double tol) const { return max_rel_err <= tol; }
};

/// Central-difference gradient verification. `forward` must recompute the
/// scalar loss from the current parameter values; `backward` must populate
/// fresh analytic gradients (zeroing first). Relative error uses
/// |num - ana| / max(|num| + |ana|, floor); run with T = double and a step
/// near 1e-3 so finite-difference truncation stays far below the tolerance.
template <typename T>
GradCheckResult gradcheck(const ParamRefs<T>& params, const std::function<T()>& forward,
                          const std::function<void()>& backward, double step = 1e-3,
                          int coords_per_param = 24, std::uint64_t probe_seed = 1234,
                          double floor = 1e-4) {
  backward();  // analytic gradients at the base point

  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.size());
  for (const Param<T>* p : params)
    analytic.emplace_back(p->grad.values());

  GradCheckResult result;
  Rng rng(probe_seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param<T>* p = params[pi];
    const std::size_t n = p->value.size();
    if (n == 0) continue;

    std::vector<std::size_t> coords;
    if (static_cast<int>(n) <= coords_per_param) {
      for (std::size_t j = 0; j < n; ++j) coords.push_back(j);
    } else {
      for (int j = 0; j < coords_per_param; ++j)
        coords.push_back(static_cast<std::size_t>(rng.uniform_int(static_cast<int>(n))));
    }

    for (std::size_t j : coords) {
      const T saved = p->value[j];
      p->value[j] = saved + static_cast<T>(step);
      const double up = static_cast<double>(forward());
      p->value[j] = saved - static_cast<T>(step);
      const double down = static_cast<double>(forward());
      p->value[j] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double ana = static_cast<double>(analytic[pi][j]);
      const double abs_err = std::fabs(numeric - ana);
      const double rel_err = abs_err / std::max(std::fabs(numeric) + std::fabs(ana), floor);
      ++result.coords_checked;
      result.max_abs_err = std::max(result.max_abs_err, abs_err);
      if (rel_err > result.max_rel_err) {
        result.max_rel_err = rel_err;
        result.worst_param = p->name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return result;
}

}  // namespace fidcal::nn
