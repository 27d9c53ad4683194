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
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include "fidcal/exp/experiment.hpp"
#include "fidcal/io/text.hpp"
#include "nlohmann/json.hpp"

namespace fidcal::exp {
namespace {

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%6.2f", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_grid(std::ostringstream& out, const std::string& heading,
                 const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                 const std::function<std::string(std::size_t, std::size_t)>& cell) {
  std::size_t name_w = heading.size();
  for (const auto& r : rows) name_w = std::max(name_w, r.size());

  out << heading;
  out << std::string(name_w - heading.size(), ' ') << " |";
  for (const auto& c : cols) {
    out << ' ';
    if (c.size() < 6) out << std::string(6 - c.size(), ' ');
    out << c;
  }
  out << '\n';
  out << std::string(name_w, '-') << "-+" << std::string(cols.size() * 7, '-') << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i] << std::string(name_w - rows[i].size(), ' ') << " |";
    for (std::size_t j = 0; j < cols.size(); ++j) out << ' ' << cell(i, j);
    out << '\n';
  }
}

}  // namespace

const ReportCell& ExperimentReport::at(const std::string& row, const std::string& cell) const {
  const auto ri = std::find(row_names.begin(), row_names.end(), row);
  FIDCAL_CHECK(ri != row_names.end(), "report: unknown row " + row);
  const auto ci = std::find(cell_labels.begin(), cell_labels.end(), cell);
  FIDCAL_CHECK(ci != cell_labels.end(), "report: unknown cell " + cell);
  return cells[static_cast<std::size_t>(ri - row_names.begin())]
              [static_cast<std::size_t>(ci - cell_labels.begin())];
}

std::string render_text_table(const ExperimentReport& report) {
  std::ostringstream out;
  out << report.title << " (accuracy %)\n\n";
  append_grid(out, "method", report.row_names, report.cell_labels,
              [&](std::size_t i, std::size_t j) { return format_pct(report.cells[i][j].accuracy_pct); });

  if (!report.meta_json.empty()) {
    const nlohmann::json meta = nlohmann::json::parse(report.meta_json);
    if (meta.contains("deltas_vs_full")) {
      std::vector<std::string> rows;
      std::vector<std::vector<double>> deltas;
      for (const auto& [name, values] : meta.at("deltas_vs_full").items()) {
        rows.push_back(name);
        deltas.push_back(values.get<std::vector<double>>());
      }
      out << "\naccuracy deficit vs full model (points)\n\n";
      append_grid(out, "removal", rows, report.cell_labels, [&](std::size_t i, std::size_t j) {
        return format_pct(deltas[i][j]);
      });
    }
  }
  return out.str();
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  nlohmann::json j;
  j["title"] = report.title;
  j["row_names"] = report.row_names;
  j["cell_labels"] = report.cell_labels;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.cells) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : row)
      cols.push_back({{"accuracy_pct", c.accuracy_pct}, {"correct", c.correct}, {"total", c.total}});
    rows.push_back(std::move(cols));
  }
  j["cells"] = std::move(rows);
  j["meta"] = report.meta_json.empty() ? nlohmann::json::object()
                                       : nlohmann::json::parse(report.meta_json);

  const std::filesystem::path root(dir);
  io::write_text_atomic((root / "report.json").string(), j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "row,cell,accuracy_pct,correct,total\n";
  for (std::size_t i = 0; i < report.row_names.size(); ++i)
    for (std::size_t k = 0; k < report.cell_labels.size(); ++k) {
      const ReportCell& c = report.cells[i][k];
      csv << report.row_names[i] << ',' << report.cell_labels[k] << ','
          << format_exact(c.accuracy_pct) << ',' << c.correct << ',' << c.total << '\n';
    }
  io::write_text_atomic((root / "report.csv").string(), csv.str());
  io::write_text_atomic((root / "table.txt").string(), render_text_table(report));
}

ExperimentReport read_report(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(io::read_text_file(path));
  ExperimentReport report;
  report.title = j.at("title").get<std::string>();
  report.row_names = j.at("row_names").get<std::vector<std::string>>();
  report.cell_labels = j.at("cell_labels").get<std::vector<std::string>>();
  for (const auto& row : j.at("cells")) {
    std::vector<ReportCell> cols;
    for (const auto& c : row)
      cols.push_back({c.at("accuracy_pct").get<double>(), c.at("correct").get<int>(),
                      c.at("total").get<int>()});
    report.cells.push_back(std::move(cols));
  }
  report.meta_json = j.at("meta").dump();
  return report;
}

}  // namespace fidcal::exp
