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

#include "parkrisk/dras.hpp"
#include "parkrisk/ingest.hpp"
#include "parkrisk/reporting.hpp"
#include "parkrisk/simulator.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace
{

using namespace parkrisk;
using dras::FrameAssessment;
using dras::TruthFrame;
using geometry::Column;
using geometry::GroundPoint;
using geometry::ZoneRef;
using risk::GazeTarget;
using risk::RiskLevel;

const PipelineConfig kConfig;

/// Detection of a pedestrian standing at assessment-frame (x, y).
ExteriorDetection pedestrian_at(Timestamp t, double x, double y, std::optional<std::string> id = {})
{
  ExteriorDetection d;
  d.timestamp = t;
  d.object_class = ObjectClass::Pedestrian;
  d.position = geometry::assessment_to_sensor({x, y, 0.9}, kConfig.extrinsics);
  d.track_id = std::move(id);
  return d;
}

void add_gaze(ldm::LocalDynamicMap & map, Timestamp t, GazeTarget g)
{
  ingest::insert_percept(map, GazeEvent{t, "dms0", g, 1.0});
}

TEST(Tick, Fig7Walkthrough)
{
  ldm::LocalDynamicMap map;
  ingest::insert_percept(map, pedestrian_at(1000, 2.9, 0.0));
  add_gaze(map, 1000, GazeTarget::Right);
  const auto f = dras::tick(map, 1000, kConfig);
  ASSERT_EQ(f.assessments.size(), 1u);
  EXPECT_EQ(f.assessments[0].zone, ZoneRef::in_zone(Column::C, 3));
  EXPECT_EQ(f.assessments[0].risk, RiskLevel::High);
  EXPECT_EQ(f.gaze_used, GazeTarget::Right);
  EXPECT_NEAR(f.assessments[0].position.x, 2.9, 1e-9);
  EXPECT_NEAR(f.assessments[0].distance, 2.9, 1e-9);
  EXPECT_NEAR(f.assessments[0].ttc, 2.9 / kConfig.params.reverse_speed, 1e-9);
  EXPECT_EQ(f.assessments[0].pedestrian, "#0");
}

TEST(Tick, StaleGazeFallsBackToUnknown)
{
  ldm::LocalDynamicMap map;
  add_gaze(map, 400, GazeTarget::Center);  // 600 ms old at t = 1000
  ingest::insert_percept(map, pedestrian_at(1000, 2.9, 0.0));
  const auto f = dras::tick(map, 1000, kConfig);
  EXPECT_EQ(f.gaze_used, GazeTarget::Unknown);
  EXPECT_EQ(f.assessments.at(0).risk, RiskLevel::High);
  // within staleness the center gaze applies and C3 stays moderate
  add_gaze(map, 600, GazeTarget::Center);
  EXPECT_EQ(dras::tick(map, 1000, kConfig).assessments.at(0).risk, RiskLevel::Moderate);
}

TEST(Tick, SceneMaxOverPedestrians)
{
  ldm::LocalDynamicMap map;
  ingest::insert_percept(map, pedestrian_at(1000, 0.5, 0.0, "a"));   // C1
  ingest::insert_percept(map, pedestrian_at(1000, 3.5, 2.6, "b"));   // L4
  add_gaze(map, 1000, GazeTarget::Left);
  const auto f = dras::tick(map, 1000, kConfig);
  ASSERT_EQ(f.assessments.size(), 2u);
  EXPECT_EQ(f.assessments[0].zone.label(), "C1");
  EXPECT_EQ(f.assessments[0].risk, RiskLevel::VeryHigh);
  EXPECT_EQ(f.assessments[1].zone.label(), "L4");
  EXPECT_EQ(f.assessments[1].risk, RiskLevel::Low);
  EXPECT_EQ(f.scene_risk, RiskLevel::VeryHigh);
}

TEST(Tick, EmptyInputsAndCars)
{
  ldm::LocalDynamicMap map;
  auto f = dras::tick(map, 1000, kConfig);
  EXPECT_TRUE(f.assessments.empty());
  EXPECT_EQ(f.scene_risk, RiskLevel::VeryLow);
  auto car = pedestrian_at(1000, 1.0, 0.0);
  car.object_class = ObjectClass::Car;
  ingest::insert_percept(map, car);
  f = dras::tick(map, 1000, kConfig);
  EXPECT_TRUE(f.assessments.empty());
  EXPECT_EQ(map.size(), 1u);  // stored, not scored
}

TEST(Tick, StaleDetectionsDropOut)
{
  ldm::LocalDynamicMap map;
  ingest::insert_percept(map, pedestrian_at(1000, 1.5, 0.0));
  EXPECT_EQ(dras::tick(map, 1200, kConfig).assessments.size(), 1u);
  EXPECT_EQ(dras::tick(map, 1201, kConfig).assessments.size(), 0u);
  EXPECT_EQ(dras::tick(map, 999, kConfig).assessments.size(), 0u);
}

TEST(Tick, MergesSources)
{
  ldm::LocalDynamicMap map;
  ingest::insert_percept(map, pedestrian_at(1000, 1.5, 0.0, "a"));
  auto other = pedestrian_at(1050, 3.5, 0.0, "b");
  other.source_id = "lidar1";
  ingest::insert_percept(map, other);
  EXPECT_EQ(dras::tick(map, 1100, kConfig).assessments.size(), 2u);
}

TEST(Tick, PipelineCorrectnessProperty)
{
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ux(-1.0, 6.5);
  std::uniform_real_distribution<double> uy(-4.0, 4.0);
  for (int frame = 0; frame < 300; ++frame) {
    ldm::LocalDynamicMap map;
    const Timestamp t = 1000 + frame;
    const auto gaze = static_cast<GazeTarget>(rng() % 4);
    add_gaze(map, t, gaze);
    std::vector<ExteriorDetection> raw;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      raw.push_back(pedestrian_at(t, ux(rng), uy(rng), "p" + std::to_string(i)));
      ingest::insert_percept(map, raw.back());
    }
    const auto f = dras::tick(map, t, kConfig);
    ASSERT_EQ(f.assessments.size(), raw.size());
    RiskLevel max = RiskLevel::VeryLow;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto p = geometry::sensor_to_assessment(raw[i].position, kConfig.extrinsics).ground();
      const auto zone = geometry::locate(p, kConfig.layout);
      ASSERT_EQ(f.assessments[i].zone, zone);
      ASSERT_EQ(f.assessments[i].risk, risk::assess(zone, gaze, kConfig.params));
      max = std::max(max, f.assessments[i].risk);
    }
    ASSERT_EQ(f.scene_risk, max);
  }
}

TEST(Tick, GazeIrrelevanceOfC1AndOutside)
{
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ux(-1.0, 6.5);
  std::uniform_real_distribution<double> uy(-4.0, 4.0);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const GroundPoint p{ux(rng), uy(rng)};
    const auto zone = geometry::locate(p, kConfig.layout);
    if (!(zone.is_outside() || zone == ZoneRef::in_zone(Column::C, 1))) {
      continue;
    }
    ++checked;
    std::optional<RiskLevel> first;
    for (auto g : {GazeTarget::Left, GazeTarget::Center, GazeTarget::Right, GazeTarget::Unknown}) {
      const auto f = dras::assess_positions(1, {{"x", p}}, g, kConfig);
      if (!first) {
        first = f.assessments[0].risk;
      }
      ASSERT_EQ(f.assessments[0].risk, *first);
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Tick, AddingPedestrianNeverLowersSceneRisk)
{
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> ux(-1.0, 6.5);
  std::uniform_real_distribution<double> uy(-4.0, 4.0);
  for (int i = 0; i < 500; ++i) {
    const auto g = static_cast<GazeTarget>(rng() % 4);
    std::vector<dras::PedestrianPosition> peds;
    RiskLevel prev = RiskLevel::VeryLow;
    for (int k = 0; k < 5; ++k) {
      peds.push_back({"p" + std::to_string(k), {ux(rng), uy(rng)}});
      const auto now = dras::assess_positions(1, peds, g, kConfig).scene_risk;
      ASSERT_GE(now, prev);
      prev = now;
    }
  }
}

TEST(AssessmentFormat, RoundTrip)
{
  ldm::LocalDynamicMap map;
  ingest::insert_percept(map, pedestrian_at(1000, 0.5, 0.0, "a"));
  ingest::insert_percept(map, pedestrian_at(1000, 3.5, 2.6, "b"));
  add_gaze(map, 1000, GazeTarget::Left);
  const auto f = dras::tick(map, 1000, kConfig);
  const auto j = dras::to_json(f);
  EXPECT_EQ(j["scene_risk"], "very_high");
  EXPECT_EQ(j["assessments"][0]["zone"], "C1");
  const auto back = dras::frame_from_json(j);
  EXPECT_EQ(dras::to_json(back).dump(), j.dump());
  EXPECT_THROW(dras::frame_from_json(wire::Json{{"gaze", "left"}}), ValidationError);
}

// ---------------------------------------------------------------- evaluate

TruthFrame truth_frame(Timestamp t, GazeTarget g, ZoneRef zone, std::string scenario = "exterior")
{
  const auto level = risk::assess(zone, g, kConfig.params);
  TruthFrame f;
  f.timestamp = t;
  f.scenario = std::move(scenario);
  f.gaze = g;
  f.risk = level;
  f.pedestrians.push_back({"p", {}, zone, level});
  return f;
}

FrameAssessment predicted_frame(Timestamp t, GazeTarget g, ZoneRef zone, const std::string & id = "p")
{
  dras::RiskAssessment a;
  a.timestamp = t;
  a.pedestrian = id;
  a.zone = zone;
  a.gaze_used = g;
  a.risk = risk::assess(zone, g, kConfig.params);
  return {t, g, a.risk, {a}};
}

TEST(Evaluate, PerfectPredictions)
{
  std::vector<TruthFrame> truth;
  std::vector<FrameAssessment> pred;
  const auto refs = geometry::all_in_zone_refs();
  for (int i = 0; i < 100; ++i) {
    const auto g = risk::kMirrorTargets[static_cast<std::size_t>(i % 3)];
    const auto z = refs[static_cast<std::size_t>(i) % refs.size()];
    truth.push_back(truth_frame(1000 + i, g, z, i % 4 ? "exterior" : "interior"));
    pred.push_back(predicted_frame(1000 + i, g, z));
  }
  const auto r = dras::evaluate(pred, truth);
  EXPECT_TRUE(r.per_pedestrian);
  EXPECT_EQ(r.overall.rows, 100u);
  EXPECT_DOUBLE_EQ(r.overall.zone(), 1.0);
  EXPECT_DOUBLE_EQ(r.overall.gaze(), 1.0);
  EXPECT_DOUBLE_EQ(r.overall.end_to_end(), 1.0);
  EXPECT_EQ(r.by_scenario.at("interior").rows, 25u);
}

TEST(Evaluate, WrongGazeOnC1FramesOnly)
{
  std::vector<TruthFrame> truth;
  std::vector<FrameAssessment> pred;
  const auto c1 = ZoneRef::in_zone(Column::C, 1);
  for (int i = 0; i < 30; ++i) {
    truth.push_back(truth_frame(1000 + i, GazeTarget::Left, c1));
    pred.push_back(predicted_frame(1000 + i, GazeTarget::Right, c1));
  }
  const auto r = dras::evaluate(pred, truth);
  EXPECT_DOUBLE_EQ(r.overall.end_to_end(), 1.0);
  EXPECT_DOUBLE_EQ(r.overall.gaze(), 0.0);
  EXPECT_DOUBLE_EQ(r.overall.zone(), 1.0);
}

TEST(Evaluate, AlignmentErrorListsTimestamps)
{
  std::vector<TruthFrame> truth{truth_frame(1000, GazeTarget::Left, ZoneRef::outside()),
                                truth_frame(1100, GazeTarget::Left, ZoneRef::outside())};
  std::vector<FrameAssessment> pred{predicted_frame(1000, GazeTarget::Left, ZoneRef::outside()),
                                    predicted_frame(1234, GazeTarget::Left, ZoneRef::outside())};
  try {
    dras::evaluate(pred, truth);
    FAIL();
  } catch (const ValidationError & e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1100"), std::string::npos);
    EXPECT_NE(msg.find("1234"), std::string::npos);
  }
}

TEST(Evaluate, PerFrameModeWithoutIds)
{
  auto t = truth_frame(1000, GazeTarget::Left, ZoneRef::in_zone(Column::R, 2));
  t.pedestrians[0].id.reset();
  const auto p = predicted_frame(1000, GazeTarget::Left, ZoneRef::in_zone(Column::R, 2), "#0");
  const auto r = dras::evaluate({p}, {t});
  EXPECT_FALSE(r.per_pedestrian);
  EXPECT_DOUBLE_EQ(r.overall.end_to_end(), 1.0);
  // a frame with no pedestrians scores as OUT / very low
  TruthFrame empty{2000, "exterior", GazeTarget::Center, RiskLevel::VeryLow, {}};
  const FrameAssessment none{2000, GazeTarget::Center, RiskLevel::VeryLow, {}};
  const auto r2 = dras::evaluate({none}, {empty});
  EXPECT_DOUBLE_EQ(r2.overall.zone(), 1.0);
  EXPECT_DOUBLE_EQ(r2.overall.end_to_end(), 1.0);
}

TEST(Evaluate, MissingPedestrianCountsAsWrong)
{
  const auto t = truth_frame(1000, GazeTarget::Left, ZoneRef::in_zone(Column::L, 2));
  const FrameAssessment empty{1000, GazeTarget::Left, RiskLevel::VeryLow, {}};
  const auto r = dras::evaluate({empty}, {t});
  EXPECT_DOUBLE_EQ(r.overall.zone(), 0.0);
  EXPECT_DOUBLE_EQ(r.overall.end_to_end(), 0.0);
  EXPECT_DOUBLE_EQ(r.overall.gaze(), 1.0);
}

TEST(Evaluate, AccuracyEqualsOneMinusOffDiagonalMass)
{
  std::mt19937_64 rng(34);
  const auto refs = geometry::all_in_zone_refs();
  std::vector<TruthFrame> truth;
  std::vector<FrameAssessment> pred;
  for (int i = 0; i < 1000; ++i) {
    const auto tz = refs[rng() % refs.size()];
    const auto pz = rng() % 4 ? tz : refs[rng() % refs.size()];
    const auto tg = risk::kMirrorTargets[rng() % 3];
    const auto pg = rng() % 3 ? tg : risk::kMirrorTargets[rng() % 3];
    truth.push_back(truth_frame(i + 1, tg, tz));
    pred.push_back(predicted_frame(i + 1, pg, pz));
  }
  const auto r = dras::evaluate(pred, truth);
  for (const auto * c : {&r.zone_confusion, &r.gaze_confusion, &r.risk_confusion}) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < c->counts().size(); ++i) {
      for (std::size_t k = 0; k < c->counts().size(); ++k) {
        off += i == k ? 0 : c->counts()[i][k];
      }
    }
    EXPECT_EQ(c->total(), 1000u);
    EXPECT_DOUBLE_EQ(c->accuracy(), 1.0 - static_cast<double>(off) / 1000.0);
  }
  EXPECT_DOUBLE_EQ(r.zone_confusion.accuracy(), r.overall.zone());
  EXPECT_DOUBLE_EQ(r.gaze_confusion.accuracy(), r.overall.gaze());
  EXPECT_DOUBLE_EQ(r.risk_confusion.accuracy(), r.overall.end_to_end());
  for (double a : {r.overall.zone(), r.overall.gaze(), r.overall.end_to_end()}) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Evaluate, MergePoolsCounts)
{
  auto a = dras::evaluate(
    {predicted_frame(1, GazeTarget::Left, ZoneRef::outside())},
    {truth_frame(1, GazeTarget::Left, ZoneRef::outside())});
  const auto b = dras::evaluate(
    {predicted_frame(2, GazeTarget::Right, ZoneRef::outside())},
    {truth_frame(2, GazeTarget::Left, ZoneRef::outside())});
  a.merge(b);
  EXPECT_EQ(a.overall.rows, 2u);
  EXPECT_DOUBLE_EQ(a.overall.gaze(), 0.5);
  EXPECT_EQ(a.gaze_confusion.total(), 2u);
}

// ---------------------------------------------------------------- reports

TEST(Reports, DistributionFromReferenceCounts)
{
  // counts per (risk class, scenario, gaze) as published
  const int counts[4][6] = {
    {29, 83, 32, 84, 249, 147},
    {63, 33, 60, 203, 175, 265},
    {26, 31, 111, 164, 81, 162},
    {38, 0, 0, 34, 46, 55}};
  std::vector<TruthFrame> truth;
  Timestamp t = 1;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 6; ++col) {
      for (int k = 0; k < counts[row][col]; ++k) {
        TruthFrame f;
        f.timestamp = t++;
        f.scenario = col < 3 ? "interior" : "exterior";
        f.gaze = risk::kMirrorTargets[static_cast<std::size_t>(col % 3)];
        f.risk = *risk::from_class_code(row);
        truth.push_back(std::move(f));
      }
    }
  }
  const auto d = reporting::distribution_report(truth);
  EXPECT_EQ(d.total(), 2171u);
  EXPECT_EQ(d.row_total(1), 799u);
  EXPECT_EQ(d.scenario_total("interior"), 506u);
  const auto text = reporting::render_distribution(d);
  EXPECT_EQ(text, test::golden("distribution_reference.txt"));
  EXPECT_NE(text.find("37%"), std::string::npos);
  EXPECT_NE(text.find("23%"), std::string::npos);
}

TEST(Reports, DistributionSmallCases)
{
  std::vector<TruthFrame> four;
  for (int code = 0; code < 4; ++code) {
    TruthFrame f;
    f.timestamp = code + 1;
    f.gaze = GazeTarget::Left;
    f.risk = *risk::from_class_code(code);
    four.push_back(f);
  }
  const auto d = reporting::distribution_report(four);
  for (int row = 0; row < 4; ++row) {
    EXPECT_EQ(d.row_total(row), 1u);
  }
  EXPECT_EQ(d.scenario_total("exterior"), 4u);
  EXPECT_NE(reporting::render_distribution(d).find("100%"), std::string::npos);

  const auto empty = reporting::render_distribution(reporting::distribution_report({}));
  EXPECT_NE(empty.find("risk 3"), std::string::npos);
  EXPECT_NE(empty.find("0%"), std::string::npos);
}

TEST(Reports, ReferenceAccuracyGolden)
{
  const auto text = reporting::render_accuracy(reporting::reference_accuracy_rows());
  EXPECT_EQ(text, test::golden("accuracy_reference.txt"));
}

TEST(Reports, EvaluationTableLayout)
{
  std::vector<TruthFrame> truth;
  std::vector<FrameAssessment> pred;
  int t = 1;
  for (const char * s : {"interior", "exterior"}) {
    for (auto g : risk::kMirrorTargets) {
      truth.push_back(truth_frame(t, g, ZoneRef::in_zone(Column::C, 3), s));
      pred.push_back(predicted_frame(t, g, ZoneRef::in_zone(Column::C, 3)));
      ++t;
    }
  }
  const auto text = reporting::render_evaluation(dras::evaluate(pred, truth));
  const auto golden = test::golden("accuracy_reference.txt");
  // same header lines and row labels as the published table
  EXPECT_EQ(text.substr(0, golden.find("Ped.")), golden.substr(0, golden.find("Ped.")));
  for (const char * label : {"Ped. detector |", "Gaze detector |", "DRAS          |"}) {
    EXPECT_NE(text.find(label), std::string::npos);
  }
  EXPECT_NE(text.find("1.00 | 1.00"), std::string::npos);
}

// ---------------------------------------------------------------- simulator

TEST(Simulator, SeedDeterminism)
{
  sim::ScenarioSpec spec;
  spec.frames = 300;
  const auto a = sim::generate(spec, kConfig);
  const auto b = sim::generate(spec, kConfig);
  const auto da = test::temp_dir("sim_a");
  const auto db = test::temp_dir("sim_b");
  sim::write_dataset(a, da);
  sim::write_dataset(b, db);
  for (const char * f : {dras::kDetectionsFile, dras::kGazeFile, dras::kTruthFile, dras::kManifestFile}) {
    EXPECT_EQ(test::read_file(da / f), test::read_file(db / f)) << f;
    EXPECT_FALSE(test::read_file(da / f).empty()) << f;
  }
  spec.seed = 43;
  sim::write_dataset(sim::generate(spec, kConfig), db);
  EXPECT_NE(test::read_file(da / dras::kTruthFile), test::read_file(db / dras::kTruthFile));
}

TEST(Simulator, Fig7Configuration)
{
  sim::ScenarioSpec spec;
  spec.frames = 100;
  spec.region = {2.9, 2.9, 0.0, 0.0};
  spec.gaze.weights = {0.0, 0.0, 1.0};
  spec.stratify = false;
  const auto ds = sim::generate(spec, kConfig);
  ASSERT_EQ(ds.truth.size(), 100u);
  for (const auto & f : ds.truth) {
    ASSERT_EQ(f.pedestrians.size(), 1u);
    EXPECT_EQ(f.pedestrians[0].zone.label(), "C3");
    EXPECT_EQ(f.risk, RiskLevel::High);
    EXPECT_EQ(f.gaze, GazeTarget::Right);
  }
}

TEST(Simulator, ReversingTraversesBandsMonotonically)
{
  sim::ScenarioSpec spec;
  spec.frames = 45;
  spec.scene_frames = 45;
  spec.region = {4.6, 4.6, 0.3, 0.3};
  spec.motion = sim::Motion::Reversing;
  const auto ds = sim::generate(spec, kConfig);
  std::vector<int> bands;
  for (const auto & f : ds.truth) {
    const auto & z = f.pedestrians.at(0).zone;
    if (z.kind == geometry::ZoneKind::InZone && (bands.empty() || bands.back() != z.band)) {
      bands.push_back(z.band);
    }
  }
  EXPECT_EQ(bands, (std::vector<int>{4, 3, 2, 1}));
  EXPECT_LT(ds.truth.back().pedestrians[0].position.x, ds.truth.front().pedestrians[0].position.x);
}

TEST(Simulator, RejectsInvalidSpecs)
{
  sim::ScenarioSpec spec;
  spec.gaze.weights = {0, 0, 0};
  EXPECT_THROW(sim::generate(spec, kConfig), ValidationError);
  spec = {};
  spec.class_weights = {-1, 1, 1, 1};
  EXPECT_THROW(sim::generate(spec, kConfig), ValidationError);
  spec = {};
  spec.region.x_min = -1.0;
  EXPECT_THROW(sim::generate(spec, kConfig), ValidationError);
  spec = {};
  spec.frame_rate = 0.0;
  EXPECT_THROW(sim::generate(spec, kConfig), ValidationError);
  sim::NoiseModel noise;
  noise.gaze_confusion[0] = {0.5, 0.2, 0.2};
  EXPECT_THROW(noise.validate(), ValidationError);
  noise = {};
  noise.detection_drop_rate = 1.5;
  EXPECT_THROW(noise.validate(), ValidationError);
}

TEST(Simulator, StratificationTracksClassWeights)
{
  sim::ScenarioSpec spec;
  spec.frames = 6000;
  spec.scene_frames = 1;
  const auto ds = sim::generate(spec, kConfig);
  const auto d = reporting::distribution_report(ds.truth);
  for (int row = 0; row < 4; ++row) {
    const double share = static_cast<double>(d.row_total(row)) / 6000.0;
    EXPECT_NEAR(share, spec.class_weights[static_cast<std::size_t>(row)], 0.03) << row;
  }
  const double interior = static_cast<double>(d.scenario_total("interior")) / 6000.0;
  EXPECT_NEAR(interior, 0.23, 0.03);
}

TEST(Simulator, ZeroNoiseIsIdentity)
{
  sim::ScenarioSpec spec;
  spec.frames = 200;
  const auto clean = sim::generate(spec, kConfig);
  const auto noisy = sim::apply_noise(clean, {}, 5);
  EXPECT_EQ(noisy.detections, clean.detections);
  EXPECT_EQ(noisy.gazes, clean.gazes);
  EXPECT_EQ(noisy.truth.size(), clean.truth.size());
}

TEST(Simulator, UniformGazeConfusion)
{
  sim::ScenarioSpec spec;
  spec.frames = 3000;
  const auto clean = sim::generate(spec, kConfig);
  sim::NoiseModel noise;
  for (auto & row : noise.gaze_confusion) {
    row = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  }
  const auto report = sim::evaluate_dataset(sim::apply_noise(clean, noise, 9), kConfig);
  EXPECT_NEAR(report.overall.gaze(), 1.0 / 3.0, 0.05);
  EXPECT_DOUBLE_EQ(report.overall.zone(), 1.0);
}

TEST(Simulator, PositionNoiseAwayFromBoundaries)
{
  sim::ScenarioSpec spec;
  spec.frames = 2000;
  spec.boundary_margin = 0.3;
  const auto clean = sim::generate(spec, kConfig);
  for (const auto & f : clean.truth) {
    ASSERT_GE(sim::boundary_distance(f.pedestrians[0].position, kConfig.layout), 0.3);
  }
  sim::NoiseModel noise;
  noise.position_sigma = 0.1;
  const auto report = sim::evaluate_dataset(sim::apply_noise(clean, noise, 10), kConfig);
  EXPECT_LT(report.overall.zone(), 1.0);
  EXPECT_GT(report.overall.zone(), 0.8);
}

TEST(Simulator, DropsCountAsMissing)
{
  sim::ScenarioSpec spec;
  spec.frames = 2000;
  spec.scene_frames = 1;
  const auto clean = sim::generate(spec, kConfig);
  sim::NoiseModel noise;
  noise.detection_drop_rate = 0.2;
  const auto noisy = sim::apply_noise(clean, noise, 11);
  const double kept = static_cast<double>(noisy.detections.size()) / 2000.0;
  EXPECT_NEAR(kept, 0.8, 0.03);
  EXPECT_NEAR(sim::evaluate_dataset(noisy, kConfig).overall.zone(), 0.8, 0.03);
}

TEST(Simulator, DatasetRoundTripThroughFiles)
{
  sim::ScenarioSpec spec;
  spec.frames = 150;
  spec.pedestrians = 2;
  spec.cars = 1;
  const auto ds = sim::generate(spec, kConfig);
  const auto dir = test::temp_dir("sim_roundtrip");
  sim::write_dataset(ds, dir);
  const auto back = sim::read_dataset(dir);
  EXPECT_EQ(back.detections, ds.detections);
  EXPECT_EQ(back.gazes, ds.gazes);
  EXPECT_EQ(back.truth.size(), ds.truth.size());
  EXPECT_EQ(back.manifest["spec"]["seed"], 42);
  EXPECT_EQ(back.manifest["frames"], 150);
}

TEST(ClosedLoop, NoiselessReplayReproducesLabels)
{
  sim::ScenarioSpec spec;
  spec.frames = 600;
  spec.pedestrians = 2;
  spec.cars = 1;
  const auto ds = sim::generate(spec, kConfig);
  const auto dir = test::temp_dir("closed_loop");
  sim::write_dataset(ds, dir);
  const auto result = dras::run_replay(dir, kConfig);
  ASSERT_TRUE(result.report);
  EXPECT_TRUE(result.report->per_pedestrian);
  EXPECT_EQ(result.report->overall.rows, 1200u);
  EXPECT_DOUBLE_EQ(result.report->overall.end_to_end(), 1.0);
  EXPECT_DOUBLE_EQ(result.report->overall.zone(), 1.0);
  EXPECT_DOUBLE_EQ(result.report->overall.gaze(), 1.0);
}

TEST(ClosedLoop, DroppedGazeStreamMatchesUnknownOracle)
{
  sim::ScenarioSpec spec;
  spec.frames = 900;
  const auto ds = sim::generate(spec, kConfig);
  const auto dir = test::temp_dir("no_gaze");
  sim::write_dataset(ds, dir);
  std::filesystem::remove(dir / dras::kGazeFile);
  const auto result = dras::run_replay(dir, kConfig);
  std::size_t unchanged = 0;
  for (const auto & f : ds.truth) {
    const auto & p = f.pedestrians.at(0);
    unchanged += risk::assess(p.zone, GazeTarget::Unknown, kConfig.params) == p.risk ? 1 : 0;
  }
  EXPECT_DOUBLE_EQ(
    result.report->overall.end_to_end(), static_cast<double>(unchanged) / ds.truth.size());
  EXPECT_LT(result.report->overall.end_to_end(), 1.0);
}

TEST(ClosedLoop, ReplayWithoutLabelsTicksAtDetections)
{
  sim::ScenarioSpec spec;
  spec.frames = 50;
  const auto dir = test::temp_dir("no_truth");
  sim::write_dataset(sim::generate(spec, kConfig), dir);
  std::filesystem::remove(dir / dras::kTruthFile);
  const auto result = dras::run_replay(dir, kConfig);
  EXPECT_FALSE(result.report);
  EXPECT_EQ(result.predictions.size(), 50u);
}

TEST(MonteCarlo, NoiselessIsExact)
{
  sim::ScenarioSpec spec;
  spec.frames = 300;
  const auto r = sim::monte_carlo(spec, {}, 3, kConfig);
  EXPECT_DOUBLE_EQ(r.end_to_end.mean, 1.0);
  EXPECT_DOUBLE_EQ(r.end_to_end.stddev, 0.0);
  EXPECT_THROW(sim::monte_carlo(spec, {}, 0, kConfig), ValidationError);
}

TEST(MonteCarlo, DeterministicPerSeedAndCiShrinks)
{
  sim::ScenarioSpec spec;
  spec.frames = 400;
  sim::NoiseModel noise;
  noise.position_sigma = 0.1;
  noise.gaze_confusion = sim::NoiseModel::symmetric_confusion(0.75);
  const auto a = sim::monte_carlo(spec, noise, 10, kConfig);
  const auto b = sim::monte_carlo(spec, noise, 10, kConfig);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  const auto big = sim::monte_carlo(spec, noise, 40, kConfig);
  // four times the trials: interval half-width near 1/2, allow sampling slack on the sd
  const double ratio = big.end_to_end.ci95 / a.end_to_end.ci95;
  EXPECT_GT(ratio, 0.25);
  EXPECT_LT(ratio, 0.85);
  const auto text = sim::render_monte_carlo(a);
  EXPECT_NE(text.find("0.83"), std::string::npos);
  EXPECT_NE(text.find("Reference"), std::string::npos);
}

TEST(MonteCarlo, NoiseModelJsonRoundTrip)
{
  sim::NoiseModel n;
  n.position_sigma = 0.12;
  n.detection_drop_rate = 0.05;
  n.gaze_confusion = sim::NoiseModel::symmetric_confusion(0.8);
  n.zone_accuracy_target = 0.9;
  const auto back = sim::NoiseModel::from_json(n.to_json());
  EXPECT_EQ(back.to_json().dump(), n.to_json().dump());
  EXPECT_THROW(sim::NoiseModel::from_json(wire::Json{{"position_sigma", -1}}), ValidationError);
  EXPECT_THROW(sim::NoiseModel::from_json(wire::Json{{"position_sigma", "x"}}), ValidationError);
}

}  // namespace
