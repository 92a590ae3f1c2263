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

#ifndef PARKRISK__CONFIG_HPP_
#define PARKRISK__CONFIG_HPP_

#include "parkrisk/errors.hpp"
#include "parkrisk/geometry.hpp"
#include "parkrisk/ldm.hpp"
#include "parkrisk/risk.hpp"
#include "parkrisk/wire.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace parkrisk
{

/// Everything the assessment pipeline needs besides its inputs.
struct PipelineConfig
{
  geometry::ZoneLayout layout{geometry::ZoneLayout::default_layout()};
  risk::RiskParameters params;
  geometry::SensorExtrinsics extrinsics;
  Timestamp gaze_staleness_ms{ldm::kGazeStalenessMs};
  Timestamp detection_staleness_ms{ldm::kDetectionStalenessMs};

  void validate()
  {
    layout.validate();
    params.validate();
    extrinsics.validate();
    if (gaze_staleness_ms < 0 || detection_staleness_ms < 0) {
      throw ValidationError("staleness must be non-negative");
    }
  }
};

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail
{

inline std::vector<double> parse_numbers(const std::string & text, const std::string & key)
{
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (in >> token) {
    for (char sep : {',', ';'}) {
      std::erase(token, sep);
    }
    if (token.empty()) {
      continue;
    }
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw ValidationError("bad number '" + token + "' in " + key);
    }
    out.push_back(v);
  }
  return out;
}

inline std::string join_numbers(const std::vector<double> & values, std::size_t group = 0)
{
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) {
      out += (group && i % group == 0) ? "; " : ", ";
    }
    out += format_double(values[i]);
  }
  return out;
}

inline geometry::Polygon parse_polygon(const std::string & text, const std::string & key)
{
  const auto v = parse_numbers(text, key);
  if (v.size() % 2 != 0) {
    throw ValidationError(key + " needs x, y pairs");
  }
  geometry::Polygon poly;
  for (std::size_t i = 0; i < v.size(); i += 2) {
    poly.push_back({v[i], v[i + 1]});
  }
  return poly;
}

inline std::string format_polygon(const geometry::Polygon & poly)
{
  std::vector<double> flat;
  for (const auto & p : poly) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return join_numbers(flat, 2);
}

template <class T>
T get_or(const boost::property_tree::ptree & tree, const std::string & path, T fallback)
{
  if (!tree.get_optional<std::string>(path)) {
    return fallback;
  }
  try {
    return tree.get<T>(path);
  } catch (const boost::property_tree::ptree_error &) {
    throw ValidationError("bad value for " + path);
  }
}

}  // namespace detail

/// INI-style config with [layout], [risk], [sensor] and [ldm] sections. Missing keys keep
/// their defaults.
inline PipelineConfig parse_config(std::istream & in)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error & e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  PipelineConfig c;
  auto & l = c.layout;
  l.bumper_half_width = detail::get_or(tree, "layout.bumper_half_width", l.bumper_half_width);
  if (auto s = tree.get_optional<std::string>("layout.band_edges")) {
    const auto v = detail::parse_numbers(*s, "band_edges");
    if (v.size() != l.band_edges.size()) {
      throw ValidationError("band_edges needs exactly 4 values");
    }
    std::copy(v.begin(), v.end(), l.band_edges.begin());
  }
  for (auto [key, line] :
       {std::pair{"layout.left_line", &l.left_line}, std::pair{"layout.right_line", &l.right_line}}) {
    if (auto s = tree.get_optional<std::string>(key)) {
      const auto v = detail::parse_numbers(*s, key);
      if (v.size() != 4) {
        throw ValidationError(std::string(key) + " needs x0, y0; x1, y1");
      }
      *line = {{v[0], v[1]}, {v[2], v[3]}};
    }
  }
  l.processing_max_x = detail::get_or(tree, "layout.processing_max_x", l.processing_max_x);
  l.a_zones_enabled = detail::get_or(tree, "layout.a_zones_enabled", l.a_zones_enabled);
  for (auto [key, side] : {std::pair{"layout.a_zone_left", geometry::Column::L},
                           std::pair{"layout.a_zone_right", geometry::Column::R}}) {
    if (auto s = tree.get_optional<std::string>(key)) {
      std::erase_if(l.a_zones, [side = side](const auto & az) { return az.side == side; });
      auto poly = detail::parse_polygon(*s, key);
      if (!poly.empty()) {
        l.a_zones.push_back({side, std::move(poly)});
      }
    }
  }

  auto & p = c.params;
  p.reverse_speed = risk::kmh_to_mps(
    detail::get_or(tree, "risk.reverse_speed_kmh", p.reverse_speed * 3.6));
  p.reaction_time = detail::get_or(tree, "risk.reaction_time_s", p.reaction_time);
  if (auto s = tree.get_optional<std::string>("risk.a_zone_base")) {
    const auto level = risk::parse_risk_level(*s);
    if (!level) {
      throw ValidationError("unknown risk level '" + *s + "'");
    }
    p.a_zone_base = *level;
  }

  auto & e = c.extrinsics;
  e.forward_offset = detail::get_or(tree, "sensor.forward_offset", e.forward_offset);
  e.lateral_offset = detail::get_or(tree, "sensor.lateral_offset", e.lateral_offset);
  e.height = detail::get_or(tree, "sensor.height", e.height);
  e.yaw = detail::get_or(tree, "sensor.yaw", e.yaw);

  c.gaze_staleness_ms = detail::get_or(tree, "ldm.gaze_staleness_ms", c.gaze_staleness_ms);
  c.detection_staleness_ms =
    detail::get_or(tree, "ldm.detection_staleness_ms", c.detection_staleness_ms);
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  return parse_config(in);
}

inline std::string format_config(const PipelineConfig & c)
{
  std::ostringstream out;
  const auto & l = c.layout;
  out << "[layout]\n"
      << "bumper_half_width = " << format_double(l.bumper_half_width) << '\n'
      << "band_edges = "
      << detail::join_numbers({l.band_edges.begin(), l.band_edges.end()}) << '\n'
      << "left_line = " << detail::format_polygon({l.left_line.p0, l.left_line.p1}) << '\n'
      << "right_line = " << detail::format_polygon({l.right_line.p0, l.right_line.p1}) << '\n'
      << "processing_max_x = " << format_double(l.processing_max_x) << '\n'
      << "a_zones_enabled = " << (l.a_zones_enabled ? "true" : "false") << '\n';
  for (auto [key, side] :
       {std::pair{"a_zone_left", geometry::Column::L}, std::pair{"a_zone_right", geometry::Column::R}}) {
    geometry::Polygon poly;
    for (const auto & az : l.a_zones) {
      if (az.side == side) {
        poly = az.polygon;
      }
    }
    out << key << " = " << detail::format_polygon(poly) << '\n';
  }
  out << "\n[risk]\n"
      << "reverse_speed_kmh = " << format_double(c.params.reverse_speed * 3.6) << '\n'
      << "reaction_time_s = " << format_double(c.params.reaction_time) << '\n'
      << "a_zone_base = " << risk::to_string(c.params.a_zone_base) << '\n'
      << "\n[sensor]\n"
      << "forward_offset = " << format_double(c.extrinsics.forward_offset) << '\n'
      << "lateral_offset = " << format_double(c.extrinsics.lateral_offset) << '\n'
      << "height = " << format_double(c.extrinsics.height) << '\n'
      << "yaw = " << format_double(c.extrinsics.yaw) << '\n'
      << "\n[ldm]\n"
      << "gaze_staleness_ms = " << c.gaze_staleness_ms << '\n'
      << "detection_staleness_ms = " << c.detection_staleness_ms << '\n';
  return out.str();
}

inline wire::Json to_json(const PipelineConfig & c)
{
  using wire::Json;
  const auto & l = c.layout;
  auto point = [](const geometry::GroundPoint & p) { return Json::array({p.x, p.y}); };
  Json layout;
  layout["bumper_half_width"] = l.bumper_half_width;
  layout["band_edges"] = l.band_edges;
  layout["left_line"] = Json::array({point(l.left_line.p0), point(l.left_line.p1)});
  layout["right_line"] = Json::array({point(l.right_line.p0), point(l.right_line.p1)});
  layout["processing_max_x"] = l.processing_max_x;
  layout["a_zones_enabled"] = l.a_zones_enabled;
  layout["a_zones"] = Json::array();
  for (const auto & az : l.a_zones) {
    Json poly = Json::array();
    for (const auto & p : az.polygon) {
      poly.push_back(point(p));
    }
    layout["a_zones"].push_back({{"side", std::string(1, geometry::column_letter(az.side))}, {"polygon", poly}});
  }
  Json j;
  j["layout"] = std::move(layout);
  j["risk"] = {
    {"reverse_speed_mps", c.params.reverse_speed},
    {"reaction_time_s", c.params.reaction_time},
    {"a_zone_base", risk::to_string(c.params.a_zone_base)},
    {"stopping_distance_m", risk::stopping_distance(c.params)}};
  j["sensor"] = {
    {"forward_offset", c.extrinsics.forward_offset},
    {"lateral_offset", c.extrinsics.lateral_offset},
    {"height", c.extrinsics.height},
    {"yaw", c.extrinsics.yaw}};
  j["ldm"] = {
    {"gaze_staleness_ms", c.gaze_staleness_ms},
    {"detection_staleness_ms", c.detection_staleness_ms}};
  return j;
}

}  // namespace parkrisk

#endif  // PARKRISK__CONFIG_HPP_
