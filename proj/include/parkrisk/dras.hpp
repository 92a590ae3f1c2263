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

#ifndef PARKRISK__DRAS_HPP_
#define PARKRISK__DRAS_HPP_

#include "parkrisk/config.hpp"
#include "parkrisk/errors.hpp"
#include "parkrisk/geometry.hpp"
#include "parkrisk/ingest.hpp"
#include "parkrisk/ldm.hpp"
#include "parkrisk/risk.hpp"
#include "parkrisk/wire.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace parkrisk::dras
{

using risk::GazeTarget;
using risk::RiskLevel;
using wire::Json;

struct RiskAssessment
{
  Timestamp timestamp{0};
  std::string pedestrian;
  geometry::GroundPoint position;
  geometry::ZoneRef zone;
  double distance{0.0};
  double ttc{0.0};
  GazeTarget gaze_used{GazeTarget::Unknown};
  RiskLevel risk{RiskLevel::VeryLow};
};

/// Output of one tick: every pedestrian's assessment plus the scene maximum.
struct FrameAssessment
{
  Timestamp timestamp{0};
  GazeTarget gaze_used{GazeTarget::Unknown};
  RiskLevel scene_risk{RiskLevel::VeryLow};
  std::vector<RiskAssessment> assessments;
};

struct PedestrianPosition
{
  std::string id;
  geometry::GroundPoint position;
};

/// Locates and scores pedestrians already in the assessment frame.
inline FrameAssessment assess_positions(
  Timestamp now, const std::vector<PedestrianPosition> & pedestrians, GazeTarget gaze,
  const PipelineConfig & config)
{
  FrameAssessment frame{now, gaze, RiskLevel::VeryLow, {}};
  for (const auto & ped : pedestrians) {
    RiskAssessment a;
    a.timestamp = now;
    a.pedestrian = ped.id;
    a.position = ped.position;
    a.zone = geometry::locate(ped.position, config.layout);
    a.distance = geometry::distance_to_bumper(ped.position, config.layout);
    a.ttc = risk::ttc(a.distance, config.params.reverse_speed);
    a.gaze_used = gaze;
    a.risk = risk::assess(a.zone, gaze, config.params);
    frame.scene_risk = std::max(frame.scene_risk, a.risk);
    frame.assessments.push_back(std::move(a));
  }
  return frame;
}

/// One assessment step at `now`: joins the freshest gaze and detection sets from the map.
/// Only pedestrians are scored; other classes stay in the map for display.
inline FrameAssessment tick(
  const ldm::LocalDynamicMap & map, Timestamp now, const PipelineConfig & config)
{
  GazeTarget gaze = GazeTarget::Unknown;
  if (auto rec = map.latest_any(ldm::LdmLayer::Interior, {now, config.gaze_staleness_ms})) {
    gaze = std::get<GazeEvent>(rec->payload).target;
  }
  std::vector<PedestrianPosition> pedestrians;
  for (const auto & rec : map.latest_per_source(
         ldm::LdmLayer::DynamicExterior, {now, config.detection_staleness_ms})) {
    for (const auto & det : std::get<DetectionSet>(rec.payload)) {
      if (det.object_class != ObjectClass::Pedestrian) {
        continue;
      }
      const auto p = geometry::sensor_to_assessment(det.position, config.extrinsics);
      pedestrians.push_back(
        {det.track_id.value_or("#" + std::to_string(pedestrians.size())), p.ground()});
    }
  }
  return assess_positions(now, pedestrians, gaze, config);
}

inline Json to_json(const RiskAssessment & a)
{
  Json j;
  j["t"] = a.timestamp;
  j["ped"] = a.pedestrian;
  j["x"] = a.position.x;
  j["y"] = a.position.y;
  j["zone"] = a.zone.label();
  j["distance"] = a.distance;
  j["ttc"] = a.ttc;
  j["gaze"] = risk::to_string(a.gaze_used);
  j["risk"] = risk::to_string(a.risk);
  return j;
}

inline Json to_json(const FrameAssessment & f)
{
  Json j;
  j["t"] = f.timestamp;
  j["gaze"] = risk::to_string(f.gaze_used);
  j["scene_risk"] = risk::to_string(f.scene_risk);
  j["assessments"] = Json::array();
  for (const auto & a : f.assessments) {
    j["assessments"].push_back(to_json(a));
  }
  return j;
}

namespace detail
{

inline GazeTarget gaze_field(const Json & j, std::size_t line)
{
  const auto g = risk::parse_gaze(j.at("gaze").get<std::string>());
  if (!g) {
    throw ParseError(line, "unknown gaze");
  }
  return *g;
}

inline RiskLevel risk_field(const Json & j, const char * key, std::size_t line)
{
  const auto r = risk::parse_risk_level(j.at(key).get<std::string>());
  if (!r) {
    throw ParseError(line, "unknown risk level");
  }
  return *r;
}

inline geometry::ZoneRef zone_field(const Json & j, std::size_t line)
{
  const auto z = geometry::parse_zone(j.at("zone").get<std::string>());
  if (!z) {
    throw ParseError(line, "unknown zone label");
  }
  return *z;
}

template <class T, class Fn>
std::vector<T> read_lines(const std::filesystem::path & path, Fn && decode)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<T> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) {
      continue;
    }
    const auto j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      throw ParseError(line, path.filename().string() + ": malformed JSON");
    }
    try {
      out.push_back(decode(j, line));
    } catch (const nlohmann::json::exception & e) {
      throw ParseError(line, path.filename().string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace detail

inline FrameAssessment frame_from_json(const Json & j, std::size_t line = 0)
try {
  FrameAssessment f;
  f.timestamp = j.at("t").get<Timestamp>();
  f.gaze_used = detail::gaze_field(j, line);
  f.scene_risk = detail::risk_field(j, "scene_risk", line);
  for (const auto & aj : j.at("assessments")) {
    RiskAssessment a;
    a.timestamp = aj.at("t").get<Timestamp>();
    a.pedestrian = aj.at("ped").get<std::string>();
    a.position = {aj.at("x").get<double>(), aj.at("y").get<double>()};
    a.zone = detail::zone_field(aj, line);
    a.distance = aj.at("distance").get<double>();
    a.ttc = aj.at("ttc").get<double>();
    a.gaze_used = detail::gaze_field(aj, line);
    a.risk = detail::risk_field(aj, "risk", line);
    f.assessments.push_back(std::move(a));
  }
  return f;
} catch (const nlohmann::json::exception & e) {
  throw ParseError(line, std::string("assessment frame: ") + e.what());
}

inline std::vector<FrameAssessment> read_predictions(const std::filesystem::path & path)
{
  return detail::read_lines<FrameAssessment>(path, frame_from_json);
}

inline void write_predictions(
  const std::vector<FrameAssessment> & frames, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  for (const auto & f : frames) {
    out << to_json(f).dump() << '\n';
  }
}

// ---------------------------------------------------------------------------------------------
// Ground truth and evaluation

struct TruthPedestrian
{
  std::optional<std::string> id;
  geometry::GroundPoint position;
  geometry::ZoneRef zone;
  RiskLevel risk{RiskLevel::VeryLow};
};

/// Labels of one frame: {"t":..,"scenario":"exterior","gaze":"right","risk":"high","peds":[..]}
struct TruthFrame
{
  Timestamp timestamp{0};
  std::string scenario{"exterior"};
  GazeTarget gaze{GazeTarget::Unknown};
  RiskLevel risk{RiskLevel::VeryLow};
  std::vector<TruthPedestrian> pedestrians;
};

inline Json to_json(const TruthFrame & f)
{
  Json j;
  j["t"] = f.timestamp;
  j["scenario"] = f.scenario;
  j["gaze"] = risk::to_string(f.gaze);
  j["risk"] = risk::to_string(f.risk);
  j["peds"] = Json::array();
  for (const auto & p : f.pedestrians) {
    Json pj;
    if (p.id) {
      pj["id"] = *p.id;
    }
    pj["x"] = p.position.x;
    pj["y"] = p.position.y;
    pj["zone"] = p.zone.label();
    pj["risk"] = risk::to_string(p.risk);
    j["peds"].push_back(std::move(pj));
  }
  return j;
}

inline TruthFrame truth_from_json(const Json & j, std::size_t line = 0)
try {
  TruthFrame f;
  f.timestamp = j.at("t").get<Timestamp>();
  f.scenario = j.value("scenario", std::string("exterior"));
  f.gaze = detail::gaze_field(j, line);
  f.risk = detail::risk_field(j, "risk", line);
  for (const auto & pj : j.at("peds")) {
    TruthPedestrian p;
    if (pj.contains("id")) {
      p.id = pj.at("id").get<std::string>();
    }
    p.position = {pj.at("x").get<double>(), pj.at("y").get<double>()};
    p.zone = detail::zone_field(pj, line);
    p.risk = detail::risk_field(pj, "risk", line);
    f.pedestrians.push_back(std::move(p));
  }
  return f;
} catch (const nlohmann::json::exception & e) {
  throw ParseError(line, std::string("label frame: ") + e.what());
}

inline std::vector<TruthFrame> read_truth(const std::filesystem::path & path)
{
  return detail::read_lines<TruthFrame>(path, truth_from_json);
}

/// Square confusion matrix over a fixed label set; rows are truth, columns predictions.
class Confusion
{
public:
  explicit Confusion(std::vector<std::string> labels)
  : labels_(std::move(labels)), counts_(labels_.size(), std::vector<std::size_t>(labels_.size()))
  {
  }

  void add(const std::string & truth, const std::string & predicted)
  {
    ++counts_[index(truth)][index(predicted)];
  }

  std::size_t total() const
  {
    std::size_t n = 0;
    for (const auto & row : counts_) {
      for (auto c : row) {
        n += c;
      }
    }
    return n;
  }

  std::size_t diagonal() const
  {
    std::size_t n = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      n += counts_[i][i];
    }
    return n;
  }

  double accuracy() const
  {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(diagonal()) / static_cast<double>(n);
  }

  void merge(const Confusion & other)
  {
    if (other.labels_ != labels_) {
      throw ValidationError("cannot merge confusion matrices over different labels");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      for (std::size_t k = 0; k < counts_.size(); ++k) {
        counts_[i][k] += other.counts_[i][k];
      }
    }
  }

  const std::vector<std::string> & labels() const { return labels_; }
  const std::vector<std::vector<std::size_t>> & counts() const { return counts_; }

  Json to_json() const
  {
    return {{"labels", labels_}, {"counts", counts_}};
  }

private:
  std::size_t index(const std::string & label) const
  {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
      throw ValidationError("label not in confusion matrix: " + label);
    }
    return static_cast<std::size_t>(it - labels_.begin());
  }

  std::vector<std::string> labels_;
  std::vector<std::vector<std::size_t>> counts_;
};

inline const char * kMissing = "missing";

inline std::vector<std::string> zone_labels()
{
  std::vector<std::string> labels;
  for (const auto & z : geometry::all_in_zone_refs()) {
    labels.push_back(z.label());
  }
  for (const char * extra : {"AL", "AR", "OUT"}) {
    labels.emplace_back(extra);
  }
  labels.emplace_back(kMissing);
  return labels;
}

inline std::vector<std::string> gaze_labels() { return {"left", "center", "right", "unknown"}; }

inline std::vector<std::string> risk_labels()
{
  std::vector<std::string> labels;
  for (auto level : risk::kAllLevels) {
    labels.emplace_back(risk::to_string(level));
  }
  labels.emplace_back(kMissing);
  return labels;
}

struct AccuracyCounts
{
  std::size_t rows{0};
  std::size_t zone_ok{0};
  std::size_t gaze_ok{0};
  std::size_t risk_ok{0};

  static double ratio(std::size_t ok, std::size_t n)
  {
    return n == 0 ? 0.0 : static_cast<double>(ok) / static_cast<double>(n);
  }
  double zone() const { return ratio(zone_ok, rows); }
  double gaze() const { return ratio(gaze_ok, rows); }
  double end_to_end() const { return ratio(risk_ok, rows); }

  AccuracyCounts & operator+=(const AccuracyCounts & o)
  {
    rows += o.rows;
    zone_ok += o.zone_ok;
    gaze_ok += o.gaze_ok;
    risk_ok += o.risk_ok;
    return *this;
  }

  Json to_json() const
  {
    return {{"rows", rows}, {"zone", zone()}, {"gaze", gaze()}, {"end_to_end", end_to_end()}};
  }
};

/// Accuracy of zone assignment, gaze detection and final risk, overall and broken down by
/// (scenario tag, true gaze).
struct EvaluationReport
{
  bool per_pedestrian{false};
  AccuracyCounts overall;
  std::map<std::string, AccuracyCounts> by_scenario;
  std::map<std::string, std::map<GazeTarget, AccuracyCounts>> cells;
  Confusion zone_confusion{zone_labels()};
  Confusion gaze_confusion{gaze_labels()};
  Confusion risk_confusion{risk_labels()};

  /// Pools the counts of another report into this one.
  void merge(const EvaluationReport & other)
  {
    per_pedestrian = per_pedestrian && other.per_pedestrian;
    overall += other.overall;
    for (const auto & [s, c] : other.by_scenario) {
      by_scenario[s] += c;
    }
    for (const auto & [s, by_gaze] : other.cells) {
      for (const auto & [g, c] : by_gaze) {
        cells[s][g] += c;
      }
    }
    zone_confusion.merge(other.zone_confusion);
    gaze_confusion.merge(other.gaze_confusion);
    risk_confusion.merge(other.risk_confusion);
  }

  Json to_json() const
  {
    Json j;
    j["rows"] = overall.rows;
    j["mode"] = per_pedestrian ? "per_pedestrian" : "per_frame";
    j["overall"] = overall.to_json();
    j["by_scenario"] = Json::object();
    for (const auto & [scenario, counts] : by_scenario) {
      j["by_scenario"][scenario] = counts.to_json();
    }
    j["cells"] = Json::object();
    for (const auto & [scenario, by_gaze] : cells) {
      for (const auto & [gaze, counts] : by_gaze) {
        j["cells"][scenario][std::string(risk::to_string(gaze))] = counts.to_json();
      }
    }
    j["confusion"] = {
      {"zone", zone_confusion.to_json()},
      {"gaze", gaze_confusion.to_json()},
      {"risk", risk_confusion.to_json()}};
    return j;
  }
};

namespace detail
{

struct Row
{
  std::string scenario;
  GazeTarget true_gaze;
  GazeTarget predicted_gaze;
  std::string true_zone;
  std::string predicted_zone;
  std::string true_risk;
  std::string predicted_risk;
};

inline const RiskAssessment * riskiest(const std::vector<RiskAssessment> & list)
{
  const RiskAssessment * best = nullptr;
  for (const auto & a : list) {
    if (!best || a.risk > best->risk) {
      best = &a;
    }
  }
  return best;
}

inline std::string list_timestamps(const std::vector<Timestamp> & ts)
{
  std::string out;
  for (std::size_t i = 0; i < ts.size() && i < 20; ++i) {
    out += (i ? ", " : "") + std::to_string(ts[i]);
  }
  if (ts.size() > 20) {
    out += ", ... (" + std::to_string(ts.size()) + " total)";
  }
  return out;
}

}  // namespace detail

/// Scores predictions against labels frame by frame. Rows are per pedestrian when every
/// labeled pedestrian carries an id, otherwise one row per frame using the riskiest pedestrian.
inline EvaluationReport evaluate(
  const std::vector<FrameAssessment> & predicted, const std::vector<TruthFrame> & truth)
{
  std::map<Timestamp, const FrameAssessment *> by_time;
  for (const auto & f : predicted) {
    by_time[f.timestamp] = &f;
  }
  std::set<Timestamp> truth_times;
  std::vector<Timestamp> missing;
  for (const auto & f : truth) {
    truth_times.insert(f.timestamp);
    if (!by_time.count(f.timestamp)) {
      missing.push_back(f.timestamp);
    }
  }
  std::vector<Timestamp> unexpected;
  for (const auto & [t, f] : by_time) {
    if (!truth_times.count(t)) {
      unexpected.push_back(t);
    }
  }
  if (!missing.empty() || !unexpected.empty()) {
    std::string msg = "prediction/label frames do not align";
    if (!missing.empty()) {
      msg += "; missing predictions at t = " + detail::list_timestamps(missing);
    }
    if (!unexpected.empty()) {
      msg += "; unlabeled predictions at t = " + detail::list_timestamps(unexpected);
    }
    throw ValidationError(msg);
  }

  // per pedestrian only when there are labeled pedestrians and every one has an id
  EvaluationReport report;
  bool any = false;
  bool all_ids = true;
  for (const auto & f : truth) {
    for (const auto & p : f.pedestrians) {
      any = true;
      all_ids = all_ids && p.id.has_value();
    }
  }
  report.per_pedestrian = any && all_ids;

  std::vector<detail::Row> rows;
  for (const auto & tf : truth) {
    const auto & pf = *by_time.at(tf.timestamp);
    if (report.per_pedestrian) {
      for (const auto & tp : tf.pedestrians) {
        const auto it = std::find_if(
          pf.assessments.begin(), pf.assessments.end(),
          [&](const RiskAssessment & a) { return a.pedestrian == *tp.id; });
        const bool found = it != pf.assessments.end();
        rows.push_back(
          {tf.scenario, tf.gaze, pf.gaze_used, tp.zone.label(),
           found ? it->zone.label() : kMissing, std::string(risk::to_string(tp.risk)),
           found ? std::string(risk::to_string(it->risk)) : kMissing});
      }
    } else {
      const TruthPedestrian * tp = nullptr;
      for (const auto & p : tf.pedestrians) {
        if (!tp || p.risk > tp->risk) {
          tp = &p;
        }
      }
      const auto * pa = detail::riskiest(pf.assessments);
      rows.push_back(
        {tf.scenario, tf.gaze, pf.gaze_used, tp ? tp->zone.label() : "OUT",
         pa ? pa->zone.label() : "OUT", std::string(risk::to_string(tf.risk)),
         std::string(risk::to_string(pf.scene_risk))});
    }
  }

  for (const auto & r : rows) {
    const bool zone_ok = r.true_zone == r.predicted_zone;
    const bool gaze_ok = r.true_gaze == r.predicted_gaze;
    const bool risk_ok = r.true_risk == r.predicted_risk;
    for (auto * counts :
         {&report.overall, &report.by_scenario[r.scenario], &report.cells[r.scenario][r.true_gaze]}) {
      ++counts->rows;
      counts->zone_ok += zone_ok;
      counts->gaze_ok += gaze_ok;
      counts->risk_ok += risk_ok;
    }
    report.zone_confusion.add(r.true_zone, r.predicted_zone);
    report.gaze_confusion.add(
      std::string(risk::to_string(r.true_gaze)), std::string(risk::to_string(r.predicted_gaze)));
    report.risk_confusion.add(r.true_risk, r.predicted_risk);
  }
  return report;
}

/// Tick timestamps: the label frames when labels exist, else every detection timestamp.
inline std::vector<Timestamp> detection_timestamps(const ldm::LocalDynamicMap & map)
{
  std::set<Timestamp> ts;
  for (const auto & r : map.range(
         ldm::LdmLayer::DynamicExterior, std::numeric_limits<Timestamp>::min(),
         std::numeric_limits<Timestamp>::max())) {
    ts.insert(r.timestamp);
  }
  return {ts.begin(), ts.end()};
}

inline std::vector<FrameAssessment> run_ticks(
  const ldm::LocalDynamicMap & map, const std::vector<Timestamp> & times,
  const PipelineConfig & config)
{
  std::vector<FrameAssessment> frames;
  frames.reserve(times.size());
  for (Timestamp t : times) {
    frames.push_back(tick(map, t, config));
  }
  return frames;
}

inline constexpr const char * kDetectionsFile = "detections.jsonl";
inline constexpr const char * kGazeFile = "gaze.jsonl";
inline constexpr const char * kTruthFile = "truth.jsonl";
inline constexpr const char * kManifestFile = "manifest.json";

struct ReplayResult
{
  std::vector<FrameAssessment> predictions;
  std::optional<EvaluationReport> report;
  ingest::ReplaySummary ingest;
};

/// Ingests a dataset directory, ticks once per frame and, when labels exist, evaluates.
inline ReplayResult run_replay(
  const std::filesystem::path & dir, const PipelineConfig & config, bool lenient = false)
{
  ldm::LocalDynamicMap map;
  ReplayResult result;
  ingest::ReplayOptions options;
  options.lenient = lenient;
  std::vector<std::filesystem::path> inputs{dir / kDetectionsFile};
  if (std::filesystem::exists(dir / kGazeFile)) {
    inputs.push_back(dir / kGazeFile);
  }
  result.ingest = ingest::replay(inputs, options, map);

  const auto truth_path = dir / kTruthFile;
  if (std::filesystem::exists(truth_path)) {
    const auto truth = read_truth(truth_path);
    std::vector<Timestamp> times;
    for (const auto & f : truth) {
      times.push_back(f.timestamp);
    }
    result.predictions = run_ticks(map, times, config);
    result.report = evaluate(result.predictions, truth);
  } else {
    result.predictions = run_ticks(map, detection_timestamps(map), config);
  }
  return result;
}

}  // namespace parkrisk::dras

#endif  // PARKRISK__DRAS_HPP_
