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

#ifndef PARKRISK__SIMULATOR_HPP_
#define PARKRISK__SIMULATOR_HPP_

#include "parkrisk/config.hpp"
#include "parkrisk/dras.hpp"
#include "parkrisk/errors.hpp"
#include "parkrisk/geometry.hpp"
#include "parkrisk/ingest.hpp"
#include "parkrisk/ldm.hpp"
#include "parkrisk/reporting.hpp"
#include "parkrisk/risk.hpp"
#include "parkrisk/wire.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace parkrisk::sim
{

using dras::TruthFrame;
using risk::GazeTarget;
using risk::RiskLevel;
using wire::Json;

/// Seeded stream with platform-independent uniform and normal draws.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// SplitMix64 finalizer; also used to derive independent child seeds.
  static std::uint64_t mix(std::uint64_t x)
  {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal()
  {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Index drawn proportionally to non-negative weights.
  template <class Weights>
  std::size_t pick(const Weights & weights)
  {
    double total = 0.0;
    for (double w : weights) {
      total += w;
    }
    double u = uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < std::size(weights); ++i) {
      if (weights[i] <= 0.0) {
        continue;
      }
      last = i;
      if (u < weights[i]) {
        return i;
      }
      u -= weights[i];
    }
    return last;
  }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class Motion { Parked, Reversing };

inline std::string_view to_string(Motion m) { return m == Motion::Parked ? "parked" : "reversing"; }

/// Placement bounds in the assessment frame.
struct Region
{
  double x_min{0.2};
  double x_max{5.8};
  double y_min{-4.0};
  double y_max{4.0};
};

struct GazeSchedule
{
  std::array<double, 3> weights{1.0, 1.0, 1.0};  // left, center, right
  double dwell_min_s{3.0};
  double dwell_max_s{3.0};
};

struct ScenarioSpec
{
  std::uint64_t seed{42};
  std::size_t frames{1000};
  double frame_rate{10.0};  // Hz
  std::size_t pedestrians{1};
  Region region;
  /// Frames per scene: one placement (and scenario tag) per scene.
  std::size_t scene_frames{30};
  GazeSchedule gaze;
  double interior_fraction{0.23};
  Motion motion{Motion::Parked};
  /// Rejection-sample each placement toward `class_weights` (risk 0..3).
  bool stratify{true};
  std::array<double, 4> class_weights{0.29, 0.37, 0.26, 0.08};
  /// Minimum distance from any zone boundary for parked placements.
  double boundary_margin{0.0};
  std::size_t cars{0};
  Timestamp start_time{1'000'000};

  double duration_s() const { return static_cast<double>(frames) / frame_rate; }

  void validate(const PipelineConfig & config) const
  {
    if (!(frame_rate > 0.0) || scene_frames == 0) {
      throw ValidationError("frame_rate and scene_frames must be positive");
    }
    if (region.x_min > region.x_max || region.y_min > region.y_max) {
      throw ValidationError("empty placement region");
    }
    if (region.x_min <= 0.0 || region.x_max > config.layout.processing_max_x + 1.0) {
      throw ValidationError("placement region must lie behind the vehicle");
    }
    if (interior_fraction < 0.0 || interior_fraction > 1.0) {
      throw ValidationError("interior_fraction must be in [0, 1]");
    }
    double gaze_total = 0.0;
    for (double w : gaze.weights) {
      if (w < 0.0) {
        throw ValidationError("gaze weights must be non-negative");
      }
      gaze_total += w;
    }
    double class_total = 0.0;
    for (double w : class_weights) {
      if (w < 0.0) {
        throw ValidationError("class weights must be non-negative");
      }
      class_total += w;
    }
    if (gaze_total <= 0.0 || class_total <= 0.0) {
      throw ValidationError("weights must not all be zero");
    }
    if (gaze.dwell_min_s <= 0.0 || gaze.dwell_min_s > gaze.dwell_max_s) {
      throw ValidationError("invalid gaze dwell range");
    }
    if (boundary_margin < 0.0 || start_time <= 0) {
      throw ValidationError("invalid margin or start time");
    }
  }

  Json to_json() const
  {
    return {
      {"seed", seed},
      {"frames", frames},
      {"frame_rate", frame_rate},
      {"pedestrians", pedestrians},
      {"region", {region.x_min, region.x_max, region.y_min, region.y_max}},
      {"scene_frames", scene_frames},
      {"gaze_weights", gaze.weights},
      {"gaze_dwell_s", {gaze.dwell_min_s, gaze.dwell_max_s}},
      {"interior_fraction", interior_fraction},
      {"motion", to_string(motion)},
      {"stratify", stratify},
      {"class_weights", class_weights},
      {"boundary_margin", boundary_margin},
      {"cars", cars},
      {"start_time", start_time}};
  }
};

/// Detector error model. Position noise is isotropic on the ground plane; gaze labels pass
/// through a row-stochastic confusion matrix (rows: true left/center/right).
struct NoiseModel
{
  double position_sigma{0.0};
  double detection_drop_rate{0.0};
  std::array<std::array<double, 3>, 3> gaze_confusion{
    {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  std::optional<double> zone_accuracy_target;
  std::optional<double> gaze_accuracy_target;

  void validate() const
  {
    if (position_sigma < 0.0 || !std::isfinite(position_sigma)) {
      throw ValidationError("position_sigma must be non-negative");
    }
    if (detection_drop_rate < 0.0 || detection_drop_rate > 1.0) {
      throw ValidationError("detection_drop_rate must be in [0, 1]");
    }
    for (const auto & row : gaze_confusion) {
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) {
          throw ValidationError("gaze confusion entries must be non-negative");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("gaze confusion rows must sum to 1");
      }
    }
    for (const auto & target : {zone_accuracy_target, gaze_accuracy_target}) {
      if (target && (*target <= 0.0 || *target > 1.0)) {
        throw ValidationError("accuracy targets must be in (0, 1]");
      }
    }
  }

  /// Diagonal `accuracy`, remaining mass split evenly.
  static std::array<std::array<double, 3>, 3> symmetric_confusion(double accuracy)
  {
    const double off = (1.0 - accuracy) / 2.0;
    return {{{accuracy, off, off}, {off, accuracy, off}, {off, off, accuracy}}};
  }

  Json to_json() const
  {
    Json j{
      {"position_sigma", position_sigma},
      {"detection_drop_rate", detection_drop_rate},
      {"gaze_confusion", gaze_confusion}};
    if (zone_accuracy_target) {
      j["zone_accuracy_target"] = *zone_accuracy_target;
    }
    if (gaze_accuracy_target) {
      j["gaze_accuracy_target"] = *gaze_accuracy_target;
    }
    return j;
  }

  static NoiseModel from_json(const Json & j)
  {
    NoiseModel n;
    try {
      n.position_sigma = j.value("position_sigma", 0.0);
      n.detection_drop_rate = j.value("detection_drop_rate", 0.0);
      if (j.contains("gaze_confusion")) {
        n.gaze_confusion = j.at("gaze_confusion").get<std::array<std::array<double, 3>, 3>>();
      }
      if (j.contains("zone_accuracy_target")) {
        n.zone_accuracy_target = j.at("zone_accuracy_target").get<double>();
      }
      if (j.contains("gaze_accuracy_target")) {
        n.gaze_accuracy_target = j.at("gaze_accuracy_target").get<double>();
      }
    } catch (const nlohmann::json::exception & e) {
      throw ValidationError(std::string("noise model: ") + e.what());
    }
    n.validate();
    return n;
  }
};

inline NoiseModel load_noise(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open noise model " + path.string());
  }
  const auto j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw ValidationError("noise model is not valid JSON");
  }
  return NoiseModel::from_json(j);
}

struct Dataset
{
  std::vector<ExteriorDetection> detections;
  std::vector<GazeEvent> gazes;
  std::vector<TruthFrame> truth;
  Json manifest;
};

/// Distance from p to the nearest zone boundary (band edges, division lines, bumper line).
inline double boundary_distance(const geometry::GroundPoint & p, const geometry::ZoneLayout & l)
{
  const double d = geometry::distance_to_bumper(p, l);
  double best = std::abs(p.x);
  for (double edge : l.band_edges) {
    best = std::min(best, std::abs(d - edge));
  }
  for (const auto * line : {&l.left_line, &l.right_line}) {
    const double slope = (line->p1.y - line->p0.y) / (line->p1.x - line->p0.x);
    best = std::min(best, std::abs(line->offset(p)) / std::sqrt(1.0 + slope * slope));
  }
  return best;
}

namespace detail
{

inline constexpr double kPedestrianHeight = 0.9;  // detection centroid above ground

inline geometry::GroundPoint sample_point(Rng & rng, const Region & r)
{
  return {rng.uniform(r.x_min, r.x_max), rng.uniform(r.y_min, r.y_max)};
}

inline geometry::GroundPoint place_pedestrian(
  Rng & rng, const ScenarioSpec & spec, const PipelineConfig & config, GazeTarget gaze)
{
  constexpr int kAttempts = 2000;
  const bool check_margin = spec.boundary_margin > 0.0;
  std::optional<int> target;
  if (spec.stratify) {
    target = static_cast<int>(rng.pick(spec.class_weights));
  }
  std::optional<geometry::GroundPoint> fallback;
  for (int i = 0; i < kAttempts; ++i) {
    const auto p = sample_point(rng, spec.region);
    if (check_margin && boundary_distance(p, config.layout) < spec.boundary_margin) {
      continue;
    }
    if (!target) {
      return p;
    }
    if (!fallback) {
      fallback = p;
    }
    const auto level = risk::assess(geometry::locate(p, config.layout), gaze, config.params);
    if (risk::class_code(level) == target) {
      return p;
    }
  }
  return fallback.value_or(sample_point(rng, spec.region));
}

inline Timestamp frame_time(const ScenarioSpec & spec, std::size_t i)
{
  return spec.start_time +
         static_cast<Timestamp>(std::llround(static_cast<double>(i) * 1000.0 / spec.frame_rate));
}

}  // namespace detail

/// Noiseless percepts plus labels. Parked scenes hold one placement for `scene_frames`
/// frames; in reversing scenes the vehicle backs up at the configured speed past
/// world-stationary pedestrians.
inline Dataset generate(const ScenarioSpec & spec, const PipelineConfig & config)
{
  spec.validate(config);
  Rng rng(spec.seed);
  Dataset ds;

  GazeTarget gaze = GazeTarget::Unknown;
  std::size_t next_gaze_switch = 0;
  std::string scenario = "exterior";
  std::vector<geometry::GroundPoint> placements;  // assessment frame at scene start
  std::vector<geometry::GroundPoint> cars;
  std::size_t scene = 0;

  for (std::size_t i = 0; i < spec.frames; ++i) {
    const Timestamp t = detail::frame_time(spec, i);
    if (i >= next_gaze_switch) {
      gaze = risk::kMirrorTargets[rng.pick(spec.gaze.weights)];
      const double dwell = rng.uniform(spec.gaze.dwell_min_s, spec.gaze.dwell_max_s);
      next_gaze_switch =
        i + std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dwell * spec.frame_rate)));
    }
    const std::size_t frame_in_scene = i % spec.scene_frames;
    if (frame_in_scene == 0) {
      scene = i / spec.scene_frames;
      scenario = rng.uniform() < spec.interior_fraction ? "interior" : "exterior";
      placements.clear();
      for (std::size_t k = 0; k < spec.pedestrians; ++k) {
        placements.push_back(
          spec.motion == Motion::Parked ? detail::place_pedestrian(rng, spec, config, gaze)
                                        : detail::sample_point(rng, spec.region));
      }
      cars.clear();
      for (std::size_t k = 0; k < spec.cars; ++k) {
        cars.push_back(detail::sample_point(rng, spec.region));
      }
    }

    // Bumper pose for this frame; the scene starts with the bumper at the world origin facing
    // +x, so a point at assessment (x, y) sits at world (-x, y).
    geometry::VehiclePose pose;
    if (spec.motion == Motion::Reversing) {
      pose.bumper.x =
        -config.params.reverse_speed * static_cast<double>(frame_in_scene) / spec.frame_rate;
    }
    auto to_frame = [&](const geometry::GroundPoint & start) {
      return geometry::world_to_assessment({-start.x, start.y}, pose);
    };

    TruthFrame tf;
    tf.timestamp = t;
    tf.scenario = scenario;
    tf.gaze = gaze;
    const std::string scene_tag = "s" + std::to_string(scene);
    for (std::size_t k = 0; k < placements.size(); ++k) {
      const auto p = to_frame(placements[k]);
      const auto zone = geometry::locate(p, config.layout);
      const auto level = risk::assess(zone, gaze, config.params);
      const std::string id = scene_tag + "p" + std::to_string(k);
      tf.pedestrians.push_back({id, p, zone, level});
      tf.risk = std::max(tf.risk, level);

      ExteriorDetection det;
      det.timestamp = t;
      det.object_class = ObjectClass::Pedestrian;
      det.position = geometry::assessment_to_sensor(
        {p.x, p.y, detail::kPedestrianHeight}, config.extrinsics);
      det.confidence = 0.9;
      det.track_id = id;
      ds.detections.push_back(std::move(det));
    }
    for (std::size_t k = 0; k < cars.size(); ++k) {
      const auto p = to_frame(cars[k]);
      ExteriorDetection det;
      det.timestamp = t;
      det.object_class = ObjectClass::Car;
      det.position = geometry::assessment_to_sensor({p.x, p.y, 0.7}, config.extrinsics);
      det.confidence = 0.9;
      det.track_id = scene_tag + "c" + std::to_string(k);
      ds.detections.push_back(std::move(det));
    }
    ds.gazes.push_back({t, "dms0", gaze, 1.0});
    ds.truth.push_back(std::move(tf));
  }

  ds.manifest = {
    {"generator", "parkrisk simulate"},
    {"spec", spec.to_json()},
    {"config", to_json(config)},
    {"frames", ds.truth.size()},
    {"detections", ds.detections.size()},
    {"noise", nullptr}};
  return ds;
}

/// Perturbs percepts; labels are left untouched.
inline Dataset apply_noise(const Dataset & clean, const NoiseModel & noise, std::uint64_t seed)
{
  noise.validate();
  Rng rng(Rng::mix(seed ^ 0x6e6f697365ULL));
  Dataset ds;
  ds.truth = clean.truth;
  ds.manifest = clean.manifest;
  ds.manifest["noise"] = noise.to_json();
  ds.manifest["noise_seed"] = seed;
  for (const auto & det : clean.detections) {
    const double u = rng.uniform();
    const double dx = rng.normal() * noise.position_sigma;
    const double dy = rng.normal() * noise.position_sigma;
    if (u < noise.detection_drop_rate) {
      continue;
    }
    auto noisy = det;
    noisy.position.x += dx;
    noisy.position.y += dy;
    ds.detections.push_back(std::move(noisy));
  }
  for (const auto & g : clean.gazes) {
    auto noisy = g;
    const double u = rng.uniform();
    if (g.target != GazeTarget::Unknown) {
      const auto & row = noise.gaze_confusion[static_cast<std::size_t>(g.target)];
      double acc = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        acc += row[k];
        if (u < acc || k + 1 == row.size()) {
          noisy.target = risk::kMirrorTargets[k];
          break;
        }
      }
    }
    ds.gazes.push_back(std::move(noisy));
  }
  return ds;
}

inline void write_dataset(const Dataset & ds, const std::filesystem::path & dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char * name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
      throw IoError("cannot write " + (dir / name).string());
    }
    return out;
  };
  {
    auto out = open(dras::kDetectionsFile);
    for (const auto & d : ds.detections) {
      out << wire::serialize_line(d) << '\n';
    }
  }
  {
    auto out = open(dras::kGazeFile);
    for (const auto & g : ds.gazes) {
      out << wire::serialize_line(g) << '\n';
    }
  }
  {
    auto out = open(dras::kTruthFile);
    for (const auto & f : ds.truth) {
      out << dras::to_json(f).dump() << '\n';
    }
  }
  auto out = open(dras::kManifestFile);
  out << ds.manifest.dump(2) << '\n';
}

inline Dataset read_dataset(const std::filesystem::path & dir)
{
  Dataset ds;
  std::vector<ingest::LineError> errors;
  for (auto & p : ingest::read_percepts({dir / dras::kDetectionsFile, dir / dras::kGazeFile}, false, errors)) {
    if (auto * d = std::get_if<ExteriorDetection>(&p)) {
      ds.detections.push_back(std::move(*d));
    } else {
      ds.gazes.push_back(std::get<GazeEvent>(p));
    }
  }
  ds.truth = dras::read_truth(dir / dras::kTruthFile);
  if (std::ifstream in(dir / dras::kManifestFile); in) {
    ds.manifest = Json::parse(in, nullptr, false);
  }
  return ds;
}

/// In-memory equivalent of writing the dataset and replaying it: load percepts into a fresh
/// map and tick at every labeled frame.
inline std::vector<dras::FrameAssessment> run_pipeline(
  const Dataset & ds, const PipelineConfig & config)
{
  ldm::LocalDynamicMap map;
  for (const auto & d : ds.detections) {
    ingest::insert_percept(map, d);
  }
  for (const auto & g : ds.gazes) {
    ingest::insert_percept(map, g);
  }
  std::vector<Timestamp> times;
  times.reserve(ds.truth.size());
  for (const auto & f : ds.truth) {
    times.push_back(f.timestamp);
  }
  return dras::run_ticks(map, times, config);
}

inline dras::EvaluationReport evaluate_dataset(const Dataset & ds, const PipelineConfig & config)
{
  return dras::evaluate(run_pipeline(ds, config), ds.truth);
}

/// Resolves accuracy targets into concrete noise parameters. The gaze target sets a symmetric
/// confusion matrix; the zone target bisects position_sigma on a seeded calibration run.
inline NoiseModel calibrate(
  NoiseModel noise, const ScenarioSpec & spec, const PipelineConfig & config,
  std::size_t calibration_frames = 12000)
{
  if (noise.gaze_accuracy_target) {
    noise.gaze_confusion = NoiseModel::symmetric_confusion(*noise.gaze_accuracy_target);
  }
  if (noise.zone_accuracy_target) {
    ScenarioSpec cal = spec;
    cal.frames = std::max(spec.frames, calibration_frames);
    cal.seed = Rng::mix(spec.seed ^ 0x63616c6962ULL);
    const Dataset clean = generate(cal, config);
    NoiseModel probe = noise;
    probe.gaze_confusion = NoiseModel::symmetric_confusion(1.0);
    double lo = 0.0;
    double hi = 3.0;
    for (int iter = 0; iter < 24; ++iter) {
      probe.position_sigma = 0.5 * (lo + hi);
      const auto report = evaluate_dataset(apply_noise(clean, probe, cal.seed), config);
      (report.overall.zone() > *noise.zone_accuracy_target ? lo : hi) = probe.position_sigma;
    }
    noise.position_sigma = 0.5 * (lo + hi);
  }
  noise.validate();
  return noise;
}

struct Statistic
{
  double mean{0.0};
  double stddev{0.0};
  double ci95{0.0};  // half width of the normal-approximation interval

  static Statistic of(const std::vector<double> & xs)
  {
    Statistic s;
    if (xs.empty()) {
      return s;
    }
    double sum = 0.0;
    for (double x : xs) {
      sum += x;
    }
    const double n = static_cast<double>(xs.size());
    s.mean = sum / n;
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) {
        ss += (x - s.mean) * (x - s.mean);
      }
      s.stddev = std::sqrt(ss / (n - 1.0));
    }
    s.ci95 = 1.96 * s.stddev / std::sqrt(n);
    return s;
  }

  Json to_json() const
  {
    return {{"mean", mean}, {"stddev", stddev}, {"ci95", ci95}};
  }
};

struct MonteCarloResult
{
  std::uint64_t seed{0};
  std::size_t trials{0};
  std::size_t frames{0};
  NoiseModel noise;
  Statistic zone;
  Statistic gaze;
  Statistic end_to_end;
  dras::EvaluationReport pooled;

  Json to_json() const
  {
    return {
      {"seed", seed},
      {"trials", trials},
      {"frames", frames},
      {"noise", noise.to_json()},
      {"zone", zone.to_json()},
      {"gaze", gaze.to_json()},
      {"end_to_end", end_to_end.to_json()},
      {"pooled", pooled.to_json()}};
  }
};

/// Repeated generate -> noise -> pipeline -> evaluate runs. Trial i uses a seed derived from
/// (spec.seed, i), so results are a pure function of the inputs.
inline MonteCarloResult monte_carlo(
  const ScenarioSpec & spec, const NoiseModel & noise, std::size_t trials,
  const PipelineConfig & config)
{
  if (trials < 1) {
    throw ValidationError("monte carlo needs at least one trial");
  }
  MonteCarloResult result;
  result.seed = spec.seed;
  result.trials = trials;
  result.frames = spec.frames;
  result.noise = noise;
  std::vector<double> zone;
  std::vector<double> gaze;
  std::vector<double> e2e;
  for (std::size_t i = 0; i < trials; ++i) {
    ScenarioSpec trial = spec;
    trial.seed = Rng::mix(spec.seed + 0x1000 * (i + 1));
    const auto clean = generate(trial, config);
    const auto report = evaluate_dataset(apply_noise(clean, noise, trial.seed), config);
    zone.push_back(report.overall.zone());
    gaze.push_back(report.overall.gaze());
    e2e.push_back(report.overall.end_to_end());
    if (i == 0) {
      result.pooled = report;
    } else {
      result.pooled.merge(report);
    }
  }
  result.zone = Statistic::of(zone);
  result.gaze = Statistic::of(gaze);
  result.end_to_end = Statistic::of(e2e);
  return result;
}

inline std::string render_monte_carlo(const MonteCarloResult & r)
{
  auto f4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "Monte Carlo: " << r.trials << " trials x " << r.frames << " frames (seed " << r.seed
      << ")\n";
  out << "noise: position_sigma " << f4(r.noise.position_sigma) << " m, drop rate "
      << f4(r.noise.detection_drop_rate) << ", gaze diagonal " << f4(r.noise.gaze_confusion[0][0])
      << ", " << f4(r.noise.gaze_confusion[1][1]) << ", " << f4(r.noise.gaze_confusion[2][2])
      << "\n\n";
  out << "metric        mean     stddev   95% CI\n";
  for (auto [name, s] : {std::pair{"zone      ", &r.zone}, std::pair{"gaze      ", &r.gaze},
                         std::pair{"end-to-end", &r.end_to_end}}) {
    out << name << "    " << f4(s->mean) << "   " << f4(s->stddev) << "   [" << f4(s->mean - s->ci95)
        << ", " << f4(s->mean + s->ci95) << "]\n";
  }
  out << "\nMeasured (pooled over trials)\n" << reporting::render_accuracy(reporting::accuracy_rows(r.pooled));
  out << "\nReference (published)\n"
      << reporting::render_accuracy(reporting::reference_accuracy_rows());
  return out.str();
}

}  // namespace parkrisk::sim

#endif  // PARKRISK__SIMULATOR_HPP_
