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

// Line-delimited JSON wire format shared by ingest, the LDM snapshot and the dataset files.
//
//   {"t":1000,"src":"lidar0","kind":"det","class":"pedestrian","x":-4.5,"y":0.2,"z":-1.9,
//    "conf":0.91,"track":"p0"}
//   {"t":1000,"src":"dms0","kind":"gaze","target":"right","conf":0.8}

#ifndef PARKRISK__WIRE_HPP_
#define PARKRISK__WIRE_HPP_

#include "parkrisk/errors.hpp"
#include "parkrisk/percepts.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

namespace parkrisk::wire
{

using Json = nlohmann::ordered_json;

using Percept = std::variant<ExteriorDetection, GazeEvent>;

inline Json to_json(const ExteriorDetection & d)
{
  Json j;
  j["t"] = d.timestamp;
  j["src"] = d.source_id;
  j["kind"] = "det";
  j["class"] = to_string(d.object_class);
  j["x"] = d.position.x;
  j["y"] = d.position.y;
  j["z"] = d.position.z;
  j["conf"] = d.confidence;
  if (d.track_id) {
    j["track"] = *d.track_id;
  }
  return j;
}

inline Json to_json(const GazeEvent & g)
{
  Json j;
  j["t"] = g.timestamp;
  j["src"] = g.source_id;
  j["kind"] = "gaze";
  j["target"] = to_string(g.target);
  j["conf"] = g.confidence;
  return j;
}

inline Json to_json(const Percept & p)
{
  return std::visit([](const auto & v) { return to_json(v); }, p);
}

inline std::string serialize_line(const Percept & p) { return to_json(p).dump(); }

namespace detail
{

inline double number_field(const Json & j, const char * key, std::size_t line)
{
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ParseError(line, std::string("missing numeric field '") + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(line, std::string("non-finite field '") + key + "'");
  }
  return v;
}

inline std::string string_field(
  const Json & j, const char * key, std::size_t line, const char * fallback = nullptr)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    if (fallback) {
      return fallback;
    }
    throw ParseError(line, std::string("missing field '") + key + "'");
  }
  if (!it->is_string()) {
    throw ParseError(line, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

inline double confidence_field(const Json & j, std::size_t line)
{
  if (!j.contains("conf")) {
    return 1.0;
  }
  const double c = number_field(j, "conf", line);
  if (c < 0.0 || c > 1.0) {
    throw ParseError(line, "confidence outside [0, 1]");
  }
  return c;
}

}  // namespace detail

/// Decodes one parsed JSON object into a percept. `line` only labels errors.
inline Percept from_json(const Json & j, std::size_t line = 0)
{
  if (!j.is_object()) {
    throw ParseError(line, "record is not an object");
  }
  const auto t = j.find("t");
  if (t == j.end() || !t->is_number_integer()) {
    throw ParseError(line, "missing integer timestamp 't'");
  }
  const auto kind = detail::string_field(j, "kind", line);
  if (kind == "det") {
    ExteriorDetection d;
    d.timestamp = t->get<Timestamp>();
    d.source_id = detail::string_field(j, "src", line, "lidar0");
    d.object_class = parse_object_class(detail::string_field(j, "class", line, "other"));
    d.position = {
      detail::number_field(j, "x", line), detail::number_field(j, "y", line),
      detail::number_field(j, "z", line)};
    d.confidence = detail::confidence_field(j, line);
    if (j.contains("track")) {
      d.track_id = detail::string_field(j, "track", line);
    }
    return d;
  }
  if (kind == "gaze") {
    GazeEvent g;
    g.timestamp = t->get<Timestamp>();
    g.source_id = detail::string_field(j, "src", line, "dms0");
    const auto target = detail::string_field(j, "target", line);
    const auto parsed = risk::parse_gaze(target);
    if (!parsed) {
      throw ParseError(line, "unknown gaze target '" + target + "'");
    }
    g.target = *parsed;
    g.confidence = detail::confidence_field(j, line);
    return g;
  }
  throw ParseError(line, "unknown record kind '" + kind + "'");
}

inline Percept parse_line(std::string_view text, std::size_t line = 0)
{
  Json j = Json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) {
    throw ParseError(line, "malformed JSON");
  }
  return from_json(j, line);
}

inline Timestamp timestamp_of(const Percept & p)
{
  return std::visit([](const auto & v) { return v.timestamp; }, p);
}

}  // namespace parkrisk::wire

#endif  // PARKRISK__WIRE_HPP_
