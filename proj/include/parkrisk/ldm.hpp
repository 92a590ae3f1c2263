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

#ifndef PARKRISK__LDM_HPP_
#define PARKRISK__LDM_HPP_

#include "parkrisk/errors.hpp"
#include "parkrisk/percepts.hpp"
#include "parkrisk/wire.hpp"

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace parkrisk::ldm
{

/// The four classic layers plus the vehicle-interior layer.
enum class LdmLayer { Static, QuasiStatic, SemiDynamic, DynamicExterior, Interior };

inline constexpr std::array<LdmLayer, 5> kAllLayers{
  LdmLayer::Static, LdmLayer::QuasiStatic, LdmLayer::SemiDynamic, LdmLayer::DynamicExterior,
  LdmLayer::Interior};

inline std::string_view to_string(LdmLayer layer)
{
  switch (layer) {
    case LdmLayer::Static:
      return "static";
    case LdmLayer::QuasiStatic:
      return "quasi_static";
    case LdmLayer::SemiDynamic:
      return "semi_dynamic";
    case LdmLayer::DynamicExterior:
      return "dynamic_exterior";
    case LdmLayer::Interior:
      return "interior";
  }
  return "?";
}

inline std::optional<LdmLayer> parse_layer(std::string_view s)
{
  for (LdmLayer layer : kAllLayers) {
    if (s == to_string(layer)) {
      return layer;
    }
  }
  return std::nullopt;
}

/// Prune never touches map layers.
inline bool is_dynamic(LdmLayer layer)
{
  return layer != LdmLayer::Static && layer != LdmLayer::QuasiStatic;
}

/// Opaque map data for the Static / QuasiStatic / SemiDynamic layers.
struct MapBlob
{
  std::string data;
  friend bool operator==(const MapBlob &, const MapBlob &) = default;
};

using Payload = std::variant<DetectionSet, GazeEvent, MapBlob>;

struct LdmRecord
{
  LdmLayer layer{LdmLayer::Static};
  std::string source_id;
  Timestamp timestamp{0};
  Payload payload;

  friend bool operator==(const LdmRecord &, const LdmRecord &) = default;
};

struct QueryWindow
{
  Timestamp at{0};
  Timestamp staleness{0};  // ms
};

inline constexpr Timestamp kGazeStalenessMs = 500;
inline constexpr Timestamp kDetectionStalenessMs = 200;

inline void validate(const LdmRecord & r)
{
  if (r.timestamp <= 0) {
    throw ValidationError("LDM record timestamp must be positive");
  }
  const bool ok = std::visit(
    [&](const auto & p) {
      using T = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<T, DetectionSet>) {
        return r.layer == LdmLayer::DynamicExterior;
      } else if constexpr (std::is_same_v<T, GazeEvent>) {
        return r.layer == LdmLayer::Interior;
      } else {
        return r.layer != LdmLayer::DynamicExterior && r.layer != LdmLayer::Interior;
      }
    },
    r.payload);
  if (!ok) {
    throw ValidationError(
      "payload type does not belong in layer '" + std::string(to_string(r.layer)) + "'");
  }
}

/// Time-indexed, layered store. Thread-safe: any number of concurrent writers and readers;
/// each query sees a consistent snapshot. Records are immutable once inserted.
class LocalDynamicMap
{
public:
  using RecordPtr = std::shared_ptr<const LdmRecord>;

  /// Same (layer, source, timestamp) overwrites.
  void insert(LdmRecord record)
  {
    validate(record);
    auto ptr = std::make_shared<const LdmRecord>(std::move(record));
    std::unique_lock lock(mutex_);
    auto & layer = layers_[index(ptr->layer)];
    layer.by_time[{ptr->timestamp, ptr->source_id}] = ptr;
    layer.by_source[ptr->source_id][ptr->timestamp] = ptr;
  }

  /// Adds one object to the detection set of its (source, timestamp), creating the set if
  /// needed. Per-object wire lines of one frame accumulate this way instead of overwriting.
  void append_detection(const ExteriorDetection & detection)
  {
    LdmRecord record{LdmLayer::DynamicExterior, detection.source_id, detection.timestamp, {}};
    validate(record);
    std::unique_lock lock(mutex_);
    auto & layer = layers_[index(LdmLayer::DynamicExterior)];
    DetectionSet set;
    if (auto it = layer.by_time.find({detection.timestamp, detection.source_id});
        it != layer.by_time.end()) {
      set = std::get<DetectionSet>(it->second->payload);
    }
    set.push_back(detection);
    record.payload = std::move(set);
    auto ptr = std::make_shared<const LdmRecord>(std::move(record));
    layer.by_time[{ptr->timestamp, ptr->source_id}] = ptr;
    layer.by_source[ptr->source_id][ptr->timestamp] = ptr;
  }

  /// Newest record of `source_id` with at - staleness <= timestamp <= at.
  std::optional<LdmRecord> latest(
    LdmLayer layer, const std::string & source_id, const QueryWindow & window) const
  {
    std::shared_lock lock(mutex_);
    const auto & l = layers_[index(layer)];
    const auto src = l.by_source.find(source_id);
    if (src == l.by_source.end()) {
      return std::nullopt;
    }
    auto it = src->second.upper_bound(window.at);
    if (it == src->second.begin()) {
      return std::nullopt;
    }
    --it;
    if (it->first < window.at - window.staleness) {
      return std::nullopt;
    }
    return *it->second;
  }

  /// Newest in-window record over every source (ties broken by the larger source id).
  std::optional<LdmRecord> latest_any(LdmLayer layer, const QueryWindow & window) const
  {
    auto all = latest_per_source(layer, window);
    if (all.empty()) {
      return std::nullopt;
    }
    const LdmRecord * best = &all.front();
    for (const auto & r : all) {
      if (std::pair(r.timestamp, r.source_id) > std::pair(best->timestamp, best->source_id)) {
        best = &r;
      }
    }
    return *best;
  }

  /// The in-window latest record of each source, ordered by source id.
  std::vector<LdmRecord> latest_per_source(LdmLayer layer, const QueryWindow & window) const
  {
    std::vector<LdmRecord> out;
    std::shared_lock lock(mutex_);
    const auto & l = layers_[index(layer)];
    for (const auto & [source, series] : l.by_source) {
      auto it = series.upper_bound(window.at);
      if (it == series.begin()) {
        continue;
      }
      --it;
      if (it->first >= window.at - window.staleness) {
        out.push_back(*it->second);
      }
    }
    return out;
  }

  /// Records with t0 <= timestamp <= t1, ordered by (timestamp, source id).
  std::vector<LdmRecord> range(LdmLayer layer, Timestamp t0, Timestamp t1) const
  {
    if (t0 > t1) {
      throw ValidationError("range requires t0 <= t1");
    }
    std::vector<LdmRecord> out;
    std::shared_lock lock(mutex_);
    const auto & l = layers_[index(layer)];
    for (auto it = l.by_time.lower_bound({t0, std::string()});
         it != l.by_time.end() && it->first.first <= t1; ++it) {
      out.push_back(*it->second);
    }
    return out;
  }

  /// Drops dynamic-layer records with timestamp < before. Returns the number removed.
  std::size_t prune(Timestamp before)
  {
    std::size_t removed = 0;
    std::unique_lock lock(mutex_);
    for (LdmLayer layer : kAllLayers) {
      if (!is_dynamic(layer)) {
        continue;
      }
      auto & l = layers_[index(layer)];
      auto end = l.by_time.lower_bound({before, std::string()});
      removed += static_cast<std::size_t>(std::distance(l.by_time.begin(), end));
      l.by_time.erase(l.by_time.begin(), end);
      for (auto it = l.by_source.begin(); it != l.by_source.end();) {
        it->second.erase(it->second.begin(), it->second.lower_bound(before));
        it = it->second.empty() ? l.by_source.erase(it) : std::next(it);
      }
    }
    return removed;
  }

  std::size_t size() const
  {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto & l : layers_) {
      n += l.by_time.size();
    }
    return n;
  }

  /// All records, layer by layer in (timestamp, source) order.
  std::vector<LdmRecord> snapshot() const
  {
    std::vector<LdmRecord> out;
    std::shared_lock lock(mutex_);
    for (const auto & l : layers_) {
      for (const auto & [key, ptr] : l.by_time) {
        out.push_back(*ptr);
      }
    }
    return out;
  }

private:
  using TimeKey = std::pair<Timestamp, std::string>;

  struct Layer
  {
    std::map<TimeKey, RecordPtr> by_time;
    std::map<std::string, std::map<Timestamp, RecordPtr>, std::less<>> by_source;
  };

  static std::size_t index(LdmLayer layer) { return static_cast<std::size_t>(layer); }

  mutable std::shared_mutex mutex_;
  std::array<Layer, kAllLayers.size()> layers_;
};

// Snapshot export/import: one JSON object per record.
//   {"layer":"interior","src":"dms0","t":1000,"payload":{"gaze":{...}}}

inline wire::Json to_json(const LdmRecord & r)
{
  wire::Json j;
  j["layer"] = to_string(r.layer);
  j["src"] = r.source_id;
  j["t"] = r.timestamp;
  wire::Json payload;
  std::visit(
    [&](const auto & p) {
      using T = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<T, DetectionSet>) {
        payload["detections"] = wire::Json::array();
        for (const auto & d : p) {
          payload["detections"].push_back(wire::to_json(d));
        }
      } else if constexpr (std::is_same_v<T, GazeEvent>) {
        payload["gaze"] = wire::to_json(p);
      } else {
        payload["blob"] = p.data;
      }
    },
    r.payload);
  j["payload"] = std::move(payload);
  return j;
}

inline void export_snapshot(const LocalDynamicMap & map, std::ostream & out)
{
  for (const auto & r : map.snapshot()) {
    out << to_json(r).dump() << '\n';
  }
}

inline LdmRecord record_from_json(const wire::Json & j, std::size_t line)
{
  try {
    LdmRecord r;
    const auto layer = parse_layer(j.at("layer").get<std::string>());
    if (!layer) {
      throw ParseError(line, "unknown layer");
    }
    r.layer = *layer;
    r.source_id = j.at("src").get<std::string>();
    r.timestamp = j.at("t").get<Timestamp>();
    const auto & p = j.at("payload");
    if (p.contains("detections")) {
      DetectionSet set;
      for (const auto & d : p.at("detections")) {
        set.push_back(std::get<ExteriorDetection>(wire::from_json(d, line)));
      }
      r.payload = std::move(set);
    } else if (p.contains("gaze")) {
      r.payload = std::get<GazeEvent>(wire::from_json(p.at("gaze"), line));
    } else {
      r.payload = MapBlob{p.at("blob").get<std::string>()};
    }
    return r;
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(line, e.what());
  } catch (const std::bad_variant_access &) {
    throw ParseError(line, "payload kind mismatch");
  }
}

inline std::size_t import_snapshot(std::istream & in, LocalDynamicMap & map)
{
  std::string text;
  std::size_t line = 0;
  std::size_t count = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) {
      continue;
    }
    auto j = wire::Json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      throw ParseError(line, "malformed JSON");
    }
    map.insert(record_from_json(j, line));
    ++count;
  }
  return count;
}

}  // namespace parkrisk::ldm

#endif  // PARKRISK__LDM_HPP_
