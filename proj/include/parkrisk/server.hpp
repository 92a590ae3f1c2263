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

#ifndef PARKRISK__SERVER_HPP_
#define PARKRISK__SERVER_HPP_

#include "parkrisk/config.hpp"
#include "parkrisk/dras.hpp"
#include "parkrisk/errors.hpp"
#include "parkrisk/geometry.hpp"
#include "parkrisk/ingest.hpp"
#include "parkrisk/risk.hpp"
#include "parkrisk/wire.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace parkrisk::server
{

using risk::GazeTarget;
using wire::Json;

/// One consumer of the push stream. Without coalescing every message is queued; with
/// coalescing only the newest undelivered message is kept.
class Subscription
{
public:
  explicit Subscription(bool coalesce) : coalesce_(coalesce) {}

  void push(const std::string & message)
  {
    {
      std::lock_guard lock(mutex_);
      if (closed_) {
        return;
      }
      if (coalesce_) {
        queue_.clear();
      }
      queue_.push_back(message);
    }
    cv_.notify_all();
  }

  void close()
  {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  /// Next message, or nullopt on timeout or once closed and drained.
  std::optional<std::string> pop(std::chrono::milliseconds timeout)
  {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [this] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) {
      return std::nullopt;
    }
    auto message = std::move(queue_.front());
    queue_.pop_front();
    return message;
  }

  bool closed() const
  {
    std::lock_guard lock(mutex_);
    return closed_ && queue_.empty();
  }

  bool coalescing() const { return coalesce_; }

private:
  const bool coalesce_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  bool closed_{false};
};

/// Single-producer, multi-consumer fan-out of stream messages.
class StreamHub
{
public:
  std::shared_ptr<Subscription> subscribe(bool coalesce)
  {
    auto sub = std::make_shared<Subscription>(coalesce);
    std::lock_guard lock(mutex_);
    if (closed_) {
      sub->close();
    }
    subscribers_.insert(sub);
    return sub;
  }

  void unsubscribe(const std::shared_ptr<Subscription> & sub)
  {
    std::lock_guard lock(mutex_);
    subscribers_.erase(sub);
  }

  void publish(const std::string & message)
  {
    std::lock_guard lock(mutex_);
    ++published_;
    for (const auto & sub : subscribers_) {
      sub->push(message);
    }
  }

  void publish(const dras::FrameAssessment & frame) { publish(dras::to_json(frame).dump()); }

  void close()
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
    for (const auto & sub : subscribers_) {
      sub->close();
    }
  }

  std::size_t subscriber_count() const
  {
    std::lock_guard lock(mutex_);
    return subscribers_.size();
  }

  std::size_t published() const
  {
    std::lock_guard lock(mutex_);
    return published_;
  }

private:
  mutable std::mutex mutex_;
  std::set<std::shared_ptr<Subscription>> subscribers_;
  std::size_t published_{0};
  bool closed_{false};
};

/// What-if input for POST /assess.
struct SceneState
{
  Timestamp timestamp{0};
  GazeTarget gaze{GazeTarget::Unknown};
  bool reversing{false};
  std::vector<dras::PedestrianPosition> pedestrians;
};

inline SceneState parse_scene(const Json & j)
{
  if (!j.is_object()) {
    throw ValidationError("scene must be an object");
  }
  SceneState scene;
  if (j.contains("t")) {
    if (!j["t"].is_number_integer()) {
      throw ValidationError("t must be an integer");
    }
    scene.timestamp = j["t"].get<Timestamp>();
  }
  if (j.contains("gaze")) {
    if (!j["gaze"].is_string()) {
      throw ValidationError("gaze must be a string");
    }
    const auto g = risk::parse_gaze(j["gaze"].get<std::string>());
    if (!g) {
      throw ValidationError("unknown gaze '" + j["gaze"].get<std::string>() + "'");
    }
    scene.gaze = *g;
  }
  if (j.contains("vehicle")) {
    const auto & v = j["vehicle"];
    if (v != "parked" && v != "reversing") {
      throw ValidationError("vehicle must be \"parked\" or \"reversing\"");
    }
    scene.reversing = v == "reversing";
  }
  if (j.contains("pedestrians")) {
    if (!j["pedestrians"].is_array()) {
      throw ValidationError("pedestrians must be an array");
    }
    std::set<std::string> ids;
    for (const auto & p : j["pedestrians"]) {
      if (!p.is_object() || !p.contains("id") || !p.contains("x") || !p.contains("y")) {
        throw ValidationError("each pedestrian needs id, x and y");
      }
      if (!p["x"].is_number() || !p["y"].is_number()) {
        throw ValidationError("pedestrian coordinates must be numbers");
      }
      const std::string id = p["id"].is_string() ? p["id"].get<std::string>() : p["id"].dump();
      const double x = p["x"].get<double>();
      const double y = p["y"].get<double>();
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw ValidationError("pedestrian coordinates must be finite");
      }
      if (!ids.insert(id).second) {
        throw ValidationError("duplicate pedestrian id '" + id + "'");
      }
      scene.pedestrians.push_back({id, {x, y}});
    }
  }
  return scene;
}

/// Stateless scene evaluation; same computation as a tick over an equivalent map.
inline dras::FrameAssessment assess_scene(const SceneState & scene, const PipelineConfig & config)
{
  return dras::assess_positions(scene.timestamp, scene.pedestrians, scene.gaze, config);
}

/// Zone polygons joined with the risk matrix for one gaze state.
inline Json zones_json(const PipelineConfig & config, GazeTarget gaze, int arc_resolution = 16)
{
  const auto matrix = risk::risk_matrix(config.params);
  Json zones = Json::array();
  for (const auto & zp : geometry::zone_polygons(config.layout, arc_resolution)) {
    const auto level = matrix.for_gaze(zp.zone, gaze);
    Json vertices = Json::array();
    for (const auto & v : zp.polygon) {
      vertices.push_back(Json::array({v.x, v.y}));
    }
    zones.push_back(
      {{"label", zp.zone.label()},
       {"level", risk::to_string(level)},
       {"color", risk::color_of(level)},
       {"vertices", std::move(vertices)}});
  }
  const auto outside = matrix.for_gaze(geometry::ZoneRef::outside(), gaze);
  return {
    {"gaze", risk::to_string(gaze)},
    {"outside", {{"level", risk::to_string(outside)}, {"color", risk::color_of(outside)}}},
    {"zones", std::move(zones)}};
}

/// Ingests a dataset and publishes one message per tick, paced by `speed_factor`
/// (infinity for as fast as possible). Returns the number of frames published.
inline std::size_t publish_replay(
  StreamHub & hub, const std::filesystem::path & dir, const PipelineConfig & config,
  double speed_factor = std::numeric_limits<double>::infinity())
{
  if (!(speed_factor > 0.0)) {
    throw ValidationError("speed factor must be positive");
  }
  ldm::LocalDynamicMap map;
  std::vector<std::filesystem::path> inputs{dir / dras::kDetectionsFile};
  if (std::filesystem::exists(dir / dras::kGazeFile)) {
    inputs.push_back(dir / dras::kGazeFile);
  }
  ingest::replay(inputs, {}, map);
  std::vector<Timestamp> times;
  if (std::filesystem::exists(dir / dras::kTruthFile)) {
    for (const auto & f : dras::read_truth(dir / dras::kTruthFile)) {
      times.push_back(f.timestamp);
    }
  } else {
    times = dras::detection_timestamps(map);
  }
  const auto start = std::chrono::steady_clock::now();
  for (Timestamp t : times) {
    if (std::isfinite(speed_factor)) {
      const auto offset = std::chrono::duration<double, std::milli>(
        static_cast<double>(t - times.front()) / speed_factor);
      std::this_thread::sleep_until(
        start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset));
    }
    hub.publish(dras::tick(map, t, config));
  }
  return times.size();
}

/// HTTP front end: GET /config, GET /zones, POST /assess and the GET /stream event feed.
class Server
{
public:
  explicit Server(PipelineConfig config) : config_(std::move(config))
  {
    config_.validate();
    routes();
  }

  Server(const Server &) = delete;
  Server & operator=(const Server &) = delete;

  ~Server() { stop(); }

  StreamHub & hub() { return hub_; }
  const PipelineConfig & config() const { return config_; }

  /// Serves static files (the workbench bundle) under "/".
  void mount_ui(const std::filesystem::path & dir)
  {
    if (!http_.set_mount_point("/", dir.string())) {
      throw IoError("cannot serve UI from " + dir.string());
    }
  }

  /// Binds and serves on a background thread. Port 0 picks a free port; returns the bound port.
  int start(const std::string & host, int port)
  {
    const int bound = port == 0 ? http_.bind_to_any_port(host)
                                : (http_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      throw IoError("cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
    return bound;
  }

  void wait() {
    if (thread_.joinable()) {
      thread_.join();
    }
  }

  void stop()
  {
    stopping_ = true;
    hub_.close();
    http_.stop();
    if (thread_.joinable()) {
      thread_.join();
    }
  }

private:
  static void send_error(httplib::Response & res, int status, const std::string & message)
  {
    res.status = status;
    res.set_content(Json{{"error", message}}.dump(), "application/json");
  }

  void routes()
  {
    http_.Get("/config", [this](const httplib::Request &, httplib::Response & res) {
      res.set_content(to_json(config_).dump(), "application/json");
    });

    http_.Get("/zones", [this](const httplib::Request & req, httplib::Response & res) {
      GazeTarget gaze = GazeTarget::Unknown;
      if (req.has_param("gaze")) {
        const auto g = risk::parse_gaze(req.get_param_value("gaze"));
        if (!g) {
          send_error(res, 400, "unknown gaze '" + req.get_param_value("gaze") + "'");
          return;
        }
        gaze = *g;
      }
      res.set_content(zones_json(config_, gaze).dump(), "application/json");
    });

    http_.Post("/assess", [this](const httplib::Request & req, httplib::Response & res) {
      const auto body = Json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        send_error(res, 400, "body is not valid JSON");
        return;
      }
      try {
        const auto frame = assess_scene(parse_scene(body), config_);
        res.set_content(dras::to_json(frame).dump(), "application/json");
      } catch (const ValidationError & e) {
        send_error(res, 400, e.what());
      }
    });

    http_.Get("/stream", [this](const httplib::Request & req, httplib::Response & res) {
      const bool coalesce = req.has_param("coalesce") && req.get_param_value("coalesce") == "1";
      auto sub = hub_.subscribe(coalesce);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub](std::size_t, httplib::DataSink & sink) {
          if (stopping_) {
            return false;
          }
          if (auto message = sub->pop(std::chrono::milliseconds(250))) {
            const auto event = "data: " + *message + "\n\n";
            return sink.write(event.data(), event.size());
          }
          if (sub->closed()) {
            sink.done();
            return true;
          }
          static constexpr char kKeepAlive[] = ": idle\n\n";
          return sink.write(kKeepAlive, sizeof(kKeepAlive) - 1);
        },
        [this, sub](bool) { hub_.unsubscribe(sub); });
    });
  }

  PipelineConfig config_;
  httplib::Server http_;
  StreamHub hub_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
};

}  // namespace parkrisk::server

#endif  // PARKRISK__SERVER_HPP_
