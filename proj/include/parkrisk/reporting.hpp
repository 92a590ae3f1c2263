// Copyright 2026 The parkrisk Authors
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

// Plain-text renderings: dataset distribution, accuracy breakdown and the zone risk grid.

#ifndef PARKRISK__REPORTING_HPP_
#define PARKRISK__REPORTING_HPP_

#include "parkrisk/dras.hpp"
#include "parkrisk/risk.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace parkrisk::reporting
{

using risk::GazeTarget;
using risk::RiskLevel;

namespace detail
{

inline std::string pad_left(const std::string & s, std::size_t width)
{
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string & s, std::size_t width)
{
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string center(const std::string & s, std::size_t width)
{
  if (s.size() >= width) {
    return s;
  }
  const auto left = (width - s.size()) / 2;
  return std::string(left, ' ') + s + std::string(width - s.size() - left, ' ');
}

/// Two grouped column blocks (Interior / Exterior style) plus a trailing summary column.
struct GroupedTable
{
  std::string corner_top;
  std::string corner_sub;
  std::vector<std::string> groups;
  std::vector<std::string> subcolumns;
  std::string summary_header;
  std::string summary_sub;
  struct Row
  {
    std::string label;
    std::vector<std::string> cells;  // groups.size() * subcolumns.size()
    std::string summary;
  };
  std::vector<Row> rows;
  std::optional<Row> footer;  // cells hold one entry per group, centered across it

  std::string render() const
  {
    constexpr std::size_t kCell = 7;
    std::size_t label_width = std::max(corner_top.size(), corner_sub.size());
    for (const auto & r : rows) {
      label_width = std::max(label_width, r.label.size());
    }
    if (footer) {
      label_width = std::max(label_width, footer->label.size());
    }
    std::size_t summary_width = std::max(summary_header.size(), std::size_t{4});
    const std::size_t group_width = subcolumns.size() * kCell + 2;

    std::ostringstream out;
    auto line = [&](const std::string & label, const std::vector<std::string> & blocks,
                    const std::string & summary) {
      std::string s = pad_right(label, label_width) + " |";
      for (const auto & b : blocks) {
        s += b + "|";
      }
      s += " " + summary;
      while (!s.empty() && s.back() == ' ') {
        s.pop_back();
      }
      out << s << '\n';
    };
    auto cells_block = [&](const std::vector<std::string> & cells, std::size_t g) {
      std::string b = " ";
      for (std::size_t i = 0; i < subcolumns.size(); ++i) {
        b += pad_left(cells[g * subcolumns.size() + i], kCell);
      }
      return b + " ";
    };
    auto rule = [&]() {
      std::string s = std::string(label_width + 1, '-') + "+";
      for (std::size_t g = 0; g < groups.size(); ++g) {
        s += std::string(group_width, '-') + "+";
      }
      out << s << std::string(summary_width + 1, '-') << '\n';
    };

    std::vector<std::string> header_blocks;
    std::vector<std::string> sub_blocks;
    std::vector<std::string> sub_cells;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      header_blocks.push_back(center(groups[g], group_width));
      sub_cells.insert(sub_cells.end(), subcolumns.begin(), subcolumns.end());
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      sub_blocks.push_back(cells_block(sub_cells, g));
    }
    line(corner_top, header_blocks, pad_left(summary_header, summary_width));
    line(corner_sub, sub_blocks, pad_left(summary_sub, summary_width));
    rule();
    for (const auto & r : rows) {
      std::vector<std::string> blocks;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        blocks.push_back(cells_block(r.cells, g));
      }
      line(r.label, blocks, pad_left(r.summary, summary_width));
    }
    if (footer) {
      rule();
      std::vector<std::string> blocks;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        blocks.push_back(center(footer->cells[g], group_width));
      }
      line(footer->label, blocks, footer->summary);
    }
    return out.str();
  }
};

inline std::string percent(std::size_t part, std::size_t total)
{
  if (total == 0) {
    return "0%";
  }
  return std::to_string(std::lround(100.0 * static_cast<double>(part) / static_cast<double>(total))) +
         "%";
}

inline std::string fixed2(double v)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

inline const std::vector<std::string> & default_scenarios()
{
  static const std::vector<std::string> s{"interior", "exterior"};
  return s;
}

inline std::string display_name(const std::string & scenario)
{
  std::string s = scenario;
  if (!s.empty()) {
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  }
  return s;
}

/// Frame counts per (risk class, scenario, gaze).
struct Distribution
{
  std::vector<std::string> scenarios{default_scenarios()};
  // rows: risk class 0..3, then 4 = very low (no class)
  std::map<std::string, std::array<std::array<std::size_t, 4>, 5>> counts;

  void add(int row, const std::string & scenario, GazeTarget gaze, std::size_t n = 1)
  {
    if (std::find(scenarios.begin(), scenarios.end(), scenario) == scenarios.end()) {
      scenarios.push_back(scenario);
    }
    counts[scenario][static_cast<std::size_t>(row)][static_cast<std::size_t>(gaze)] += n;
  }

  std::size_t total() const
  {
    std::size_t n = 0;
    for (const auto & [s, rows] : counts) {
      for (const auto & row : rows) {
        for (auto c : row) {
          n += c;
        }
      }
    }
    return n;
  }

  std::size_t row_total(int row) const
  {
    std::size_t n = 0;
    for (const auto & [s, rows] : counts) {
      for (auto c : rows[static_cast<std::size_t>(row)]) {
        n += c;
      }
    }
    return n;
  }

  std::size_t scenario_total(const std::string & scenario) const
  {
    std::size_t n = 0;
    if (auto it = counts.find(scenario); it != counts.end()) {
      for (const auto & row : it->second) {
        for (auto c : row) {
          n += c;
        }
      }
    }
    return n;
  }

  std::size_t cell(int row, const std::string & scenario, GazeTarget gaze) const
  {
    const auto it = counts.find(scenario);
    return it == counts.end()
             ? 0
             : it->second[static_cast<std::size_t>(row)][static_cast<std::size_t>(gaze)];
  }

  bool has_unknown_gaze() const
  {
    for (const auto & [s, rows] : counts) {
      for (const auto & row : rows) {
        if (row[static_cast<std::size_t>(GazeTarget::Unknown)] > 0) {
          return true;
        }
      }
    }
    return false;
  }
};

/// Frame class is the frame's highest risk; frames whose risk has no class go to "very low".
inline Distribution distribution_report(const std::vector<dras::TruthFrame> & truth)
{
  Distribution d;
  for (const auto & f : truth) {
    const auto code = risk::class_code(f.risk);
    d.add(code ? *code : 4, f.scenario, f.gaze);
  }
  return d;
}

inline std::string render_distribution(const Distribution & d)
{
  detail::GroupedTable t;
  t.corner_top = "Scenario";
  t.corner_sub = "Gaze";
  t.summary_header = "Total (%)";
  std::vector<GazeTarget> gazes(risk::kMirrorTargets.begin(), risk::kMirrorTargets.end());
  if (d.has_unknown_gaze()) {
    gazes.push_back(GazeTarget::Unknown);
  }
  for (const auto & s : d.scenarios) {
    t.groups.push_back(display_name(s));
  }
  for (auto g : gazes) {
    t.subcolumns.emplace_back(risk::to_string(g));
  }
  const auto total = d.total();
  for (int row = 0; row < 5; ++row) {
    if (row == 4 && d.row_total(4) == 0) {
      continue;
    }
    detail::GroupedTable::Row r;
    r.label = row < 4 ? "risk " + std::to_string(row) : "very low";
    for (const auto & s : d.scenarios) {
      for (auto g : gazes) {
        r.cells.push_back(std::to_string(d.cell(row, s, g)));
      }
    }
    r.summary = detail::percent(d.row_total(row), total);
    t.rows.push_back(std::move(r));
  }
  detail::GroupedTable::Row footer;
  footer.label = "Total (%)";
  for (const auto & s : d.scenarios) {
    footer.cells.push_back(detail::percent(d.scenario_total(s), total));
  }
  t.footer = std::move(footer);
  return t.render();
}

/// One labeled row of the accuracy table: a value per (scenario, mirror) cell plus overall.
struct AccuracyRow
{
  std::string label;
  std::vector<std::optional<double>> cells;
  double overall{0.0};
};

inline const std::array<const char *, 3> kAccuracyRowLabels{
  "Ped. detector", "Gaze detector", "DRAS"};

/// Zone accuracy, gaze accuracy and end-to-end accuracy rows of a report.
inline std::vector<AccuracyRow> accuracy_rows(
  const dras::EvaluationReport & report,
  const std::vector<std::string> & scenarios = default_scenarios())
{
  std::vector<AccuracyRow> rows(3);
  for (std::size_t i = 0; i < 3; ++i) {
    rows[i].label = kAccuracyRowLabels[i];
  }
  for (const auto & s : scenarios) {
    for (auto g : risk::kMirrorTargets) {
      std::optional<dras::AccuracyCounts> c;
      if (auto it = report.cells.find(s); it != report.cells.end()) {
        if (auto jt = it->second.find(g); jt != it->second.end() && jt->second.rows > 0) {
          c = jt->second;
        }
      }
      rows[0].cells.push_back(c ? std::optional(c->zone()) : std::nullopt);
      rows[1].cells.push_back(c ? std::optional(c->gaze()) : std::nullopt);
      rows[2].cells.push_back(c ? std::optional(c->end_to_end()) : std::nullopt);
    }
  }
  rows[0].overall = report.overall.zone();
  rows[1].overall = report.overall.gaze();
  rows[2].overall = report.overall.end_to_end();
  return rows;
}

/// Published accuracies of the reference system (interior L/C/R, exterior L/C/R, overall).
inline std::vector<AccuracyRow> reference_accuracy_rows()
{
  return {
    {"Ped. detector", {0.77, 0.98, 0.99, 0.88, 0.95, 0.95}, 0.92},
    {"Gaze detector", {0.55, 0.34, 1.0, 1.0, 1.0, 0.45}, 0.73},
    {"DRAS", {0.87, 0.74, 0.99, 0.88, 0.99, 0.51}, 0.83},
  };
}

inline std::string render_accuracy(
  const std::vector<AccuracyRow> & rows,
  const std::vector<std::string> & scenarios = default_scenarios())
{
  detail::GroupedTable t;
  t.corner_top = "Scenario";
  t.corner_sub = "Driver gaze";
  t.summary_header = "Acc";
  for (const auto & s : scenarios) {
    t.groups.push_back(display_name(s));
  }
  for (auto g : risk::kMirrorTargets) {
    t.subcolumns.emplace_back(risk::to_string(g));
  }
  for (const auto & row : rows) {
    detail::GroupedTable::Row r;
    r.label = row.label;
    for (const auto & c : row.cells) {
      r.cells.push_back(c ? detail::fixed2(*c) : "-");
    }
    r.summary = detail::fixed2(row.overall);
    t.rows.push_back(std::move(r));
  }
  return t.render();
}

inline std::string render_evaluation(const dras::EvaluationReport & report)
{
  std::vector<std::string> scenarios = default_scenarios();
  for (const auto & [s, c] : report.by_scenario) {
    if (std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end()) {
      scenarios.push_back(s);
    }
  }
  std::ostringstream out;
  out << render_accuracy(accuracy_rows(report, scenarios), scenarios);
  out << "rows: " << report.overall.rows
      << (report.per_pedestrian ? " (per pedestrian)" : " (per frame)") << '\n';
  return out.str();
}

/// Zone grid for one gaze: bands 4..1 top to bottom, columns L C R, then A-zones and outside.
inline std::string render_matrix(const risk::RiskMatrix & matrix, GazeTarget gaze)
{
  using geometry::Column;
  using geometry::ZoneRef;
  std::ostringstream out;
  out << "gaze: " << risk::to_string(gaze) << '\n';
  out << "band | " << detail::pad_right("L", 10) << detail::pad_right("C", 10) << "R\n";
  out << "-----+-----------------------------\n";
  for (int band = 4; band >= 1; --band) {
    out << "  " << band << "  | ";
    std::string s;
    for (Column c : {Column::L, Column::C, Column::R}) {
      s += detail::pad_right(
        std::string(risk::to_string(matrix.for_gaze(ZoneRef::in_zone(c, band), gaze))), 10);
    }
    while (s.back() == ' ') {
      s.pop_back();
    }
    out << s << '\n';
  }
  out << "A-zones: AL " << risk::to_string(matrix.for_gaze(ZoneRef::a_zone(Column::L), gaze))
      << ", AR " << risk::to_string(matrix.for_gaze(ZoneRef::a_zone(Column::R), gaze)) << '\n';
  out << "outside: " << risk::to_string(matrix.for_gaze(ZoneRef::outside(), gaze)) << '\n';
  return out.str();
}

inline wire::Json matrix_to_json(const risk::RiskMatrix & matrix)
{
  wire::Json rows = wire::Json::array();
  for (const auto & e : matrix.entries()) {
    rows.push_back(
      {{"zone", e.zone.label()},
       {"aware", risk::to_string(e.aware)},
       {"unaware", risk::to_string(e.unaware)}});
  }
  return rows;
}

}  // namespace parkrisk::reporting

#endif  // PARKRISK__REPORTING_HPP_
