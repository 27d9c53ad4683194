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

#include "fidcal/train/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "common.hpp"
#include "fidcal/io/text.hpp"

namespace fidcal::train {

std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::nag:
      return "nag";
    case Optimizer::adam:
      return "adam";
  }
  FIDCAL_CHECK(false, "optimizer: unknown enum value");
  return {};
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "nag") return Optimizer::nag;
  if (s == "adam") return Optimizer::adam;
  FIDCAL_CHECK(false, "optimizer: unknown name: " + s);
  return Optimizer::nag;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::setup1_clean:
      return "setup1_clean";
    case Regime::setup2_degraded:
      return "setup2_degraded";
    case Regime::setup3_restored:
      return "setup3_restored";
    case Regime::calib_oracle:
      return "calib_oracle";
    case Regime::calib_pretrained:
      return "calib_pretrained";
    case Regime::calib_end2end:
      return "calib_end2end";
  }
  FIDCAL_CHECK(false, "regime: unknown enum value");
  return {};
}

Regime regime_from_string(const std::string& s) {
  if (s == "setup1_clean") return Regime::setup1_clean;
  if (s == "setup2_degraded") return Regime::setup2_degraded;
  if (s == "setup3_restored") return Regime::setup3_restored;
  if (s == "calib_oracle") return Regime::calib_oracle;
  if (s == "calib_pretrained") return Regime::calib_pretrained;
  if (s == "calib_end2end") return Regime::calib_end2end;
  FIDCAL_CHECK(false, "regime: unknown name: " + s);
  return Regime::setup1_clean;
}

bool is_calib_regime(Regime r) {
  return r == Regime::calib_oracle || r == Regime::calib_pretrained ||
         r == Regime::calib_end2end;
}

void LRSchedule::validate() const {
  FIDCAL_CHECK(total_steps > 0, "lr schedule: total_steps must be positive");
  FIDCAL_CHECK(warmup_steps >= 0 && warmup_steps <= total_steps,
               "lr schedule: warmup_steps must lie in [0, total_steps]");
  FIDCAL_CHECK(lr_init > 0.0, "lr schedule: lr_init must be positive");
}

double LRSchedule::lr_at(long step) const {
  validate();
  FIDCAL_CHECK(step >= 0 && step < total_steps,
               "lr schedule: step " + std::to_string(step) + " outside [0, " +
                   std::to_string(total_steps) + ")");
  if (step < warmup_steps)
    return lr_init * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return lr_init * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

void TrainConfig::validate() const {
  FIDCAL_CHECK(lr_init > 0.0, "train config: lr_init must be positive");
  FIDCAL_CHECK(batch_size > 0, "train config: batch_size must be positive");
  FIDCAL_CHECK(warmup_epochs >= 0, "train config: warmup_epochs must be nonnegative");
  FIDCAL_CHECK(epochs >= warmup_epochs, "train config: epochs must be >= warmup_epochs");
  FIDCAL_CHECK(epochs >= 1, "train config: at least one epoch required");
  FIDCAL_CHECK(label_smoothing_eps >= 0.0 && label_smoothing_eps < 1.0,
               "train config: label smoothing must be in [0, 1)");
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_curves_csv(const std::vector<EpochRow>& rows, const std::string& path) {
  std::string out = "epoch,split,loss,accuracy\n";
  for (const EpochRow& r : rows) {
    out += std::to_string(r.epoch);
    out += ',';
    out += r.split;
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.accuracy);
    out += '\n';
  }
  io::write_text_atomic(path, out);
}

std::vector<EpochRow> read_curves_csv(const std::string& path) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  FIDCAL_CHECK(std::getline(in, line) && line == "epoch,split,loss,accuracy",
               "curves: unexpected header in " + path);
  std::vector<EpochRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string epoch, split, loss, acc;
    FIDCAL_CHECK(std::getline(ls, epoch, ',') && std::getline(ls, split, ',') &&
                     std::getline(ls, loss, ',') && std::getline(ls, acc, ','),
                 "curves: malformed row in " + path + ": " + line);
    EpochRow r;
    r.epoch = std::stoi(epoch);
    r.split = split;
    r.loss = std::stod(loss);
    r.accuracy = std::stod(acc);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace internal {

nlohmann::json manifest_base(const std::string& module, const TrainConfig& cfg,
                             const LRSchedule& schedule, const std::string& metric_name) {
  nlohmann::json m;
  m["module"] = module;
  m["regime"] = to_string(cfg.regime);
  m["optimizer"] = to_string(cfg.optimizer);
  m["lr_init"] = cfg.lr_init;
  m["batch_size"] = cfg.batch_size;
  m["epochs"] = cfg.epochs;
  m["warmup_epochs"] = cfg.warmup_epochs;
  m["label_smoothing_eps"] = cfg.label_smoothing_eps;
  m["seed"] = cfg.seed;
  m["steps_per_epoch"] = schedule.total_steps / cfg.epochs;
  m["total_steps"] = schedule.total_steps;
  m["warmup_steps"] = schedule.warmup_steps;
  m["metric"] = metric_name;
  return m;
}

void persist_run(const std::string& out_dir, nlohmann::json manifest, FitResult& result) {
  if (out_dir.empty()) return;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  result.curves_path = (dir / "curves.csv").string();
  write_curves_csv(result.curves, result.curves_path);

  manifest["best_epoch"] = result.best_epoch;
  manifest["best_val_loss"] = result.best_val_loss;
  manifest["best_val_metric"] = result.best_val_metric;
  manifest["initial_val_loss"] = result.initial_val_loss;
  manifest["initial_val_metric"] = result.initial_val_metric;
  manifest["curves"] = "curves.csv";
  manifest["checkpoint"] = std::filesystem::path(result.checkpoint_path).filename().string();

  result.manifest_path = (dir / "manifest.json").string();
  io::write_text_atomic(result.manifest_path, manifest.dump(2) + "\n");
}

}  // namespace internal

}  // namespace fidcal::train
