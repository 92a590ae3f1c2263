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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "ldm_oracle.hpp"
#include "parkrisk/dras.hpp"
#include "parkrisk/reporting.hpp"
#include "parkrisk/simulator.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace
{

using namespace parkrisk;
using geometry::Column;
using geometry::ZoneRef;
using risk::GazeTarget;

struct Outcome
{
  bool ok{false};
  std::string detail;
};

int g_failures = 0;

void criterion(const std::string & name, double limit_s, const std::function<Outcome()> & body)
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception & e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (o.ok && elapsed > limit_s) {
    o.ok = false;
    o.detail += " (over the " + std::to_string(limit_s) + " s budget)";
  }
  g_failures += o.ok ? 0 : 1;
  std::printf(
    "%s %-22s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), elapsed, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 4)
{
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------- risk matrix

// Expected levels written out by hand from the rules: rows are bands 4..1, columns L C R.
const std::map<std::string, std::array<std::array<const char *, 3>, 4>> kExpectedGrid{
  {"left",
   {{{"low", "low", "low"},
     {"moderate", "high", "high"},
     {"high", "very_high", "very_high"},
     {"high", "very_high", "very_high"}}}},
  {"center",
   {{{"low", "low", "low"},
     {"high", "moderate", "high"},
     {"very_high", "high", "very_high"},
     {"very_high", "very_high", "very_high"}}}},
  {"right",
   {{{"low", "low", "low"},
     {"high", "high", "moderate"},
     {"very_high", "very_high", "high"},
     {"very_high", "very_high", "high"}}}},
  {"unknown",
   {{{"low", "low", "low"},
     {"high", "high", "high"},
     {"very_high", "very_high", "very_high"},
     {"very_high", "very_high", "very_high"}}}},
};

Outcome risk_matrix_golden()
{
  const PipelineConfig config;
  const auto matrix = risk::risk_matrix(config.params);
  std::size_t cells = 0;
  std::size_t agree = 0;
  for (const auto & [name, grid] : kExpectedGrid) {
    const auto gaze = *risk::parse_gaze(name);
    for (int row = 0; row < 4; ++row) {
      for (int col = 0; col < 3; ++col) {
        const ZoneRef zone = ZoneRef::in_zone(static_cast<Column>(col), 4 - row);
        const std::string expected = grid[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
        cells += 2;
        agree += risk::to_string(risk::assess(zone, gaze, config.params)) == expected ? 1 : 0;
        agree += risk::to_string(matrix.for_gaze(zone, gaze)) == expected ? 1 : 0;
      }
    }
    for (const auto & [zone, expected] :
         std::vector<std::pair<ZoneRef, std::string>>{
           {ZoneRef::a_zone(Column::L), "low"},
           {ZoneRef::a_zone(Column::R), "low"},
           {ZoneRef::outside(), "very_low"}}) {
      cells += 2;
      agree += risk::to_string(risk::assess(zone, gaze, config.params)) == expected ? 1 : 0;
      agree += risk::to_string(matrix.for_gaze(zone, gaze)) == expected ? 1 : 0;
    }
    cells += 1;
    agree += reporting::render_matrix(matrix, gaze) == test::golden("matrix_" + name + ".txt") ? 1 : 0;
  }
  return {agree == cells, std::to_string(agree) + "/" + std::to_string(cells) + " cells agree"};
}

// ---------------------------------------------------------------- geometry

Outcome geometry_oracle()
{
  const PipelineConfig config;
  const auto polygons = geometry::zone_polygons(config.layout, 4096);
  struct Box
  {
    double x0, x1, y0, y1;
  };
  std::vector<Box> boxes;
  for (const auto & zp : polygons) {
    Box b{1e9, -1e9, 1e9, -1e9};
    for (const auto & v : zp.polygon) {
      b = {std::min(b.x0, v.x), std::max(b.x1, v.x), std::min(b.y0, v.y), std::max(b.y1, v.y)};
    }
    boxes.push_back(b);
  }
  std::mt19937_64 rng(20260);
  std::uniform_real_distribution<double> ux(-2.5, 6.5);
  std::uniform_real_distribution<double> uy(-5.0, 5.0);
  constexpr int kPoints = 100000;
  int agree = 0;
  double worst = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const geometry::GroundPoint p{ux(rng), uy(rng)};
    ZoneRef oracle = ZoneRef::outside();
    for (std::size_t k = 0; k < polygons.size(); ++k) {
      const auto & b = boxes[k];
      if (p.x < b.x0 || p.x > b.x1 || p.y < b.y0 || p.y > b.y1) {
        continue;
      }
      if (test::crossing_contains(polygons[k].polygon, p)) {
        oracle = polygons[k].zone;
        break;
      }
    }
    if (oracle == geometry::locate(p, config.layout)) {
      ++agree;
    } else {
      worst = std::max(worst, test::analytic_boundary_distance(p, config.layout));
    }
  }
  const double rate = static_cast<double>(agree) / kPoints;
  return {
    rate >= 0.999 && worst <= 1e-6,
    "agreement " + fmt(rate, 5) + ", worst disagreement " + fmt(worst, 9) + " m from a boundary"};
}

// ---------------------------------------------------------------- time to collision

Outcome ttc_threshold()
{
  const risk::RiskParameters params;  // 5 km/h, 1.5 s
  const double speed = 5.0 / 3.6;
  const double stop = risk::stopping_distance(params);
  const double t2 = risk::ttc(2.0, params.reverse_speed);
  const bool exact = std::abs(stop - speed * 1.5) <= 1e-9 && std::abs(t2 - 2.0 / speed) <= 1e-9 &&
                     std::abs(t2 - 1.44) <= 1e-9;
  return {
    exact && stop >= 2.0 && t2 <= 1.5,
    "stopping distance " + fmt(stop) + " m, ttc(2 m) " + fmt(t2) + " s"};
}

// ---------------------------------------------------------------- closed loop

Outcome closed_loop()
{
  const PipelineConfig config;
  sim::ScenarioSpec spec;  // seed 42
  spec.frames = 1000;
  const auto dir = test::temp_dir("acceptance_closed_loop");
  sim::write_dataset(sim::generate(spec, config), dir);
  const auto result = dras::run_replay(dir, config);
  if (!result.report) {
    return {false, "no labels found"};
  }
  const auto & o = result.report->overall;
  return {
    o.rows >= 1000 && o.risk_ok == o.rows,
    std::to_string(o.rows) + " rows, end-to-end " + fmt(o.end_to_end())};
}

// ---------------------------------------------------------------- Monte Carlo

Outcome monte_carlo_band()
{
  const PipelineConfig config;
  sim::ScenarioSpec spec;
  spec.frames = 2000;
  sim::NoiseModel noise;
  noise.zone_accuracy_target = 0.92;
  noise.gaze_accuracy_target = 0.73;
  noise = sim::calibrate(noise, spec, config);
  const auto r = sim::monte_carlo(spec, noise, 20, config);
  const auto text = sim::render_monte_carlo(r);
  const bool ok = std::abs(r.zone.mean - 0.92) <= 0.02 && std::abs(r.gaze.mean - 0.73) <= 0.02 &&
                  r.end_to_end.mean >= 0.67 && r.end_to_end.mean <= 0.95 &&
                  text.find("DRAS          |    0.87   0.74   0.99 |    0.88   0.99   0.51 | 0.83") !=
                    std::string::npos;
  return {
    ok, "20 x 2000 frames, sigma " + fmt(noise.position_sigma) + ": zone " + fmt(r.zone.mean) +
          ", gaze " + fmt(r.gaze.mean) + ", end-to-end " + fmt(r.end_to_end.mean) + " +/- " +
          fmt(r.end_to_end.ci95)};
}

// ---------------------------------------------------------------- LDM

Outcome ldm_oracle()
{
  std::mt19937_64 rng(7);
  ldm::LocalDynamicMap map;
  test::LinearLdm oracle;
  std::size_t mismatches = 0;
  std::size_t queries = 0;
  for (int op = 0; op < 10000; ++op) {
    const auto kind = rng() % 10;
    if (kind < 6) {
      const auto r = test::random_record(rng);
      map.insert(r);
      oracle.insert(r);
    } else if (kind < 8) {
      const auto layer = ldm::kAllLayers[rng() % ldm::kAllLayers.size()];
      const std::string src(1, static_cast<char>('a' + rng() % 3));
      const ldm::QueryWindow w{
        static_cast<Timestamp>(rng() % 220), static_cast<Timestamp>(rng() % 60)};
      ++queries;
      mismatches += map.latest(layer, src, w) == oracle.latest(layer, src, w) ? 0 : 1;
    } else if (kind < 9) {
      const auto layer = ldm::kAllLayers[rng() % ldm::kAllLayers.size()];
      auto t0 = static_cast<Timestamp>(rng() % 220);
      auto t1 = static_cast<Timestamp>(rng() % 220);
      if (t0 > t1) {
        std::swap(t0, t1);
      }
      ++queries;
      mismatches += map.range(layer, t0, t1) == oracle.range(layer, t0, t1) ? 0 : 1;
    } else {
      const auto before = static_cast<Timestamp>(rng() % 100);
      ++queries;
      mismatches += map.prune(before) == oracle.prune(before) ? 0 : 1;
    }
    mismatches += map.size() == oracle.size() ? 0 : 1;
  }

  // same records in two insertion orders give identical snapshots
  std::vector<ldm::LdmRecord> records;
  for (int i = 0; i < 1000; ++i) {
    records.push_back(test::random_record(rng, 1000000000));
  }
  ldm::LocalDynamicMap a;
  ldm::LocalDynamicMap b;
  for (const auto & r : records) {
    a.insert(r);
  }
  std::shuffle(records.begin(), records.end(), rng);
  for (const auto & r : records) {
    b.insert(r);
  }
  std::ostringstream sa;
  std::ostringstream sb;
  ldm::export_snapshot(a, sa);
  ldm::export_snapshot(b, sb);
  const bool order_ok = sa.str() == sb.str();

  return {
    mismatches == 0 && order_ok,
    "10000 ops, " + std::to_string(queries) + " queries, " + std::to_string(mismatches) +
      " mismatches, order independent: " + (order_ok ? "yes" : "no")};
}

// ---------------------------------------------------------------- determinism

int shell(const std::string & command) { return std::system(command.c_str()); }

Outcome cli_determinism()
{
  const std::string cli = PARKRISK_CLI_PATH;
  std::vector<std::filesystem::path> dirs{
    test::temp_dir("acceptance_det_a"), test::temp_dir("acceptance_det_b")};
  for (const auto & dir : dirs) {
    const std::string d = "'" + dir.string() + "'";
    if (shell(cli + " --seed 42 simulate --out " + d + " --frames 1000 --peds 2 --cars 1 > /dev/null") ||
        shell(cli + " replay " + d + " > /dev/null") ||
        shell(cli + " evaluate " + d + " --format json > " + d + "/evaluation.json")) {
      return {false, "CLI run failed in " + dir.string()};
    }
  }
  std::size_t compared = 0;
  for (const char * f : {"detections.jsonl", "gaze.jsonl", "truth.jsonl", "manifest.json",
                         "predictions.jsonl", "evaluation.json"}) {
    const auto first = test::read_file(dirs[0] / f);
    if (first.empty() || first != test::read_file(dirs[1] / f)) {
      return {false, std::string(f) + " differs between runs"};
    }
    ++compared;
  }
  return {true, std::to_string(compared) + " files byte-identical across two runs"};
}

// ---------------------------------------------------------------- reports

Outcome report_fidelity()
{
  // frame counts per (risk class, interior L C R, exterior L C R) from the published table
  const int counts[4][6] = {
    {29, 83, 32, 84, 249, 147},
    {63, 33, 60, 203, 175, 265},
    {26, 31, 111, 164, 81, 162},
    {38, 0, 0, 34, 46, 55}};
  std::vector<dras::TruthFrame> truth;
  Timestamp t = 1;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 6; ++col) {
      for (int k = 0; k < counts[row][col]; ++k) {
        dras::TruthFrame f;
        f.timestamp = t++;
        f.scenario = col < 3 ? "interior" : "exterior";
        f.gaze = risk::kMirrorTargets[static_cast<std::size_t>(col % 3)];
        f.risk = *risk::from_class_code(row);
        truth.push_back(std::move(f));
      }
    }
  }
  const bool dist = reporting::render_distribution(reporting::distribution_report(truth)) ==
                    test::golden("distribution_reference.txt");
  const bool acc = reporting::render_accuracy(reporting::reference_accuracy_rows()) ==
                   test::golden("accuracy_reference.txt");
  return {
    dist && acc, std::string("distribution table ") + (dist ? "matches" : "differs") +
                   ", accuracy table " + (acc ? "matches" : "differs")};
}

}  // namespace

int main()
{
  criterion("risk-matrix", 1.0, risk_matrix_golden);
  criterion("geometry-oracle", 10.0, geometry_oracle);
  criterion("ttc-threshold", 1.0, ttc_threshold);
  criterion("closed-loop", 30.0, closed_loop);
  criterion("monte-carlo", 120.0, monte_carlo_band);
  criterion("ldm-oracle", 10.0, ldm_oracle);
  criterion("determinism", 60.0, cli_determinism);
  criterion("report-fidelity", 5.0, report_fidelity);
  std::printf("%d failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
