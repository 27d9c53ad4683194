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

#include <cstdio>

#include "fidcal/exp/experiment.hpp"

namespace fidcal::exp {

std::string GridCell::label() const {
  switch (kind) {
    case Kind::clean: return "clean";
    case Kind::uniform: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", sigma);
      return buf;
    }
    case Kind::varying_1d: return "1d";
    case Kind::varying_2d: return "2d";
  }
  return "clean";
}

std::vector<GridCell> uniform_grid() {
  std::vector<GridCell> grid;
  grid.push_back({GridCell::Kind::clean, 0.0, 0.0});
  for (double s : {0.1, 0.2, 0.3, 0.4, 0.5})
    grid.push_back({GridCell::Kind::uniform, s, 0.0});
  return grid;
}

std::vector<GridCell> full_grid() {
  std::vector<GridCell> grid = uniform_grid();
  grid.push_back({GridCell::Kind::varying_1d, 0.5, 0.0});
  grid.push_back({GridCell::Kind::varying_2d, 0.5, 0.0});
  return grid;
}

std::vector<MatrixRowSpec> full_matrix_rows() {
  using train::Regime;
  return {
      {"setup1_norestore", Regime::setup1_clean, false, false},
      {"setup1_restore", Regime::setup1_clean, true, false},
      {"setup2_norestore", Regime::setup2_degraded, false, false},
      {"setup2_restore", Regime::setup2_degraded, true, false},
      {"setup3_norestore", Regime::setup3_restored, false, false},
      {"setup3_restore", Regime::setup3_restored, true, false},
      {"oracle", Regime::calib_oracle, true, false},
      {"oracle_ens", Regime::calib_oracle, true, true},
      {"pretrained", Regime::calib_pretrained, true, false},
      {"pretrained_ens", Regime::calib_pretrained, true, true},
      {"end2end", Regime::calib_end2end, true, false},
      {"end2end_ens", Regime::calib_end2end, true, true},
  };
}

void ExperimentPlan::validate() const {
  profile.validate();
  FIDCAL_CHECK(!artifact_dir.empty(), "plan: artifact directory must be set");
  FIDCAL_CHECK(!rows.empty(), "plan: at least one matrix row required");
  FIDCAL_CHECK(!grid.empty(), "plan: at least one grid cell required");
  for (const auto& row : rows) {
    FIDCAL_CHECK(!row.id.empty(), "plan: row id must be set");
    if (train::is_calib_regime(row.regime))
      FIDCAL_CHECK(row.restore, "plan: calibration rows always restore");
    else
      FIDCAL_CHECK(!row.ensemble, "plan: ensemble flag applies to calibration rows only");
  }
  for (const auto& cell : grid) {
    FIDCAL_CHECK(cell.sigma >= 0.0 && cell.sigma_lo >= 0.0, "plan: negative degradation level");
    if (cell.kind == GridCell::Kind::clean)
      FIDCAL_CHECK(cell.sigma == 0.0, "plan: clean cell must carry sigma 0");
  }
}

ExperimentPlan default_plan(const std::string& profile_name, const std::string& artifact_dir,
                            std::uint64_t seed) {
  ExperimentPlan plan;
  plan.profile = profile_from_string(profile_name);
  plan.artifact_dir = artifact_dir;
  plan.seed = seed;
  plan.rows = full_matrix_rows();
  plan.grid = full_grid();
  return plan;
}

}  // namespace fidcal::exp
