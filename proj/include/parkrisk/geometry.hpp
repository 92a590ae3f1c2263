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

#ifndef PARKRISK__GEOMETRY_HPP_
#define PARKRISK__GEOMETRY_HPP_

#include "parkrisk/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <compare>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parkrisk::geometry
{

/// Ground-plane point in the assessment frame. Origin is the rear-bumper center projected to
/// the ground; x grows rearward (away from the vehicle), y grows toward the vehicle's left.
struct GroundPoint
{
  double x{0.0};
  double y{0.0};

  friend bool operator==(const GroundPoint &, const GroundPoint &) = default;
};

struct Point3
{
  double x{0.0};
  double y{0.0};
  double z{0.0};

  GroundPoint ground() const { return {x, y}; }
  friend bool operator==(const Point3 &, const Point3 &) = default;
};

using Polygon = std::vector<GroundPoint>;

/// Mounting of the exterior sensor relative to the bumper origin. The sensor frame is
/// x-forward, y-left, z-up.
struct SensorExtrinsics
{
  double forward_offset{1.5};
  double lateral_offset{0.0};
  double height{1.9};
  double yaw{0.0};

  void validate() const
  {
    if (!std::isfinite(forward_offset) || !std::isfinite(lateral_offset) || !std::isfinite(yaw)) {
      throw ValidationError("sensor extrinsics must be finite");
    }
    if (!(height > 0.0) || !std::isfinite(height)) {
      throw ValidationError("sensor height must be positive");
    }
  }
};

/// Rotates by yaw, translates by the mounting offsets, then flips the forward axis so x points
/// rearward from the bumper.
inline Point3 sensor_to_assessment(const Point3 & p, const SensorExtrinsics & ext)
{
  const double c = std::cos(ext.yaw);
  const double s = std::sin(ext.yaw);
  const double forward = c * p.x - s * p.y + ext.forward_offset;
  const double left = s * p.x + c * p.y + ext.lateral_offset;
  return {-forward, left, p.z + ext.height};
}

inline Point3 assessment_to_sensor(const Point3 & a, const SensorExtrinsics & ext)
{
  const double c = std::cos(ext.yaw);
  const double s = std::sin(ext.yaw);
  const double dx = -a.x - ext.forward_offset;
  const double dy = a.y - ext.lateral_offset;
  return {c * dx + s * dy, -s * dx + c * dy, a.z - ext.height};
}

/// Pose of the vehicle in some fixed world frame: the bumper origin and the heading of the
/// vehicle's forward axis.
struct VehiclePose
{
  GroundPoint bumper;
  double heading{0.0};
};

inline GroundPoint world_to_assessment(const GroundPoint & w, const VehiclePose & pose)
{
  const double dx = w.x - pose.bumper.x;
  const double dy = w.y - pose.bumper.y;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {-(c * dx + s * dy), -s * dx + c * dy};
}

/// Mirror-visibility boundary, estimated from two points.
struct DivisionLine
{
  GroundPoint p0;
  GroundPoint p1;

  double y_at(double x) const
  {
    const double t = (x - p0.x) / (p1.x - p0.x);
    return p0.y + t * (p1.y - p0.y);
  }

  /// Positive above the line (toward +y), negative below. Linear in the point.
  double offset(const GroundPoint & p) const { return p.y - y_at(p.x); }
};

enum class Column { L, C, R };

inline char column_letter(Column c)
{
  switch (c) {
    case Column::L:
      return 'L';
    case Column::C:
      return 'C';
    case Column::R:
      return 'R';
  }
  return '?';
}

inline Column mirror(Column c)
{
  return c == Column::L ? Column::R : c == Column::R ? Column::L : Column::C;
}

enum class ZoneKind { InZone, AZone, Outside };

/// A sub-zone label such as C1 or L3, a lateral A-zone on one side, or Outside.
struct ZoneRef
{
  ZoneKind kind{ZoneKind::Outside};
  Column column{Column::C};  // side for A-zones
  int band{0};               // 1..4 for in-zone refs, 0 otherwise

  static constexpr ZoneRef in_zone(Column c, int band) { return {ZoneKind::InZone, c, band}; }
  static constexpr ZoneRef a_zone(Column side) { return {ZoneKind::AZone, side, 0}; }
  static constexpr ZoneRef outside() { return {}; }

  bool is_outside() const { return kind == ZoneKind::Outside; }

  std::string label() const
  {
    switch (kind) {
      case ZoneKind::InZone:
        return std::string(1, column_letter(column)) + std::to_string(band);
      case ZoneKind::AZone:
        return std::string("A") + column_letter(column);
      case ZoneKind::Outside:
        break;
    }
    return "OUT";
  }

  friend auto operator<=>(const ZoneRef &, const ZoneRef &) = default;
};

inline std::optional<ZoneRef> parse_zone(std::string_view text)
{
  std::string s;
  for (char ch : text) {
    s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  if (s == "OUT") {
    return ZoneRef::outside();
  }
  if (s == "AL") {
    return ZoneRef::a_zone(Column::L);
  }
  if (s == "AR") {
    return ZoneRef::a_zone(Column::R);
  }
  if (s.size() == 2 && s[1] >= '1' && s[1] <= '4') {
    const int band = s[1] - '0';
    switch (s[0]) {
      case 'L':
        return ZoneRef::in_zone(Column::L, band);
      case 'C':
        return ZoneRef::in_zone(Column::C, band);
      case 'R':
        return ZoneRef::in_zone(Column::R, band);
      default:
        break;
    }
  }
  return std::nullopt;
}

/// Every in-zone ref, bands outermost-first within each column order L, C, R.
inline std::vector<ZoneRef> all_in_zone_refs()
{
  std::vector<ZoneRef> refs;
  for (Column c : {Column::L, Column::C, Column::R}) {
    for (int band = 1; band <= 4; ++band) {
      refs.push_back(ZoneRef::in_zone(c, band));
    }
  }
  return refs;
}

struct AZone
{
  Column side{Column::L};
  Polygon polygon;  // convex, counter-clockwise after validation
};

inline double signed_area(const Polygon & poly)
{
  double twice = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const auto & a = poly[i];
    const auto & b = poly[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

/// Boundary-inclusive containment for a convex counter-clockwise polygon.
inline bool convex_contains(const Polygon & poly, const GroundPoint & p)
{
  if (poly.size() < 3) {
    return false;
  }
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const auto & a = poly[i];
    const auto & b = poly[(i + 1) % n];
    if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0.0) {
      return false;
    }
  }
  return true;
}

/// Partition of the area behind the vehicle into risk sub-zones. All distances in meters.
struct ZoneLayout
{
  double bumper_half_width{0.875};
  std::array<double, 4> band_edges{1.0, 2.0, 3.0, 4.0};
  DivisionLine left_line{{0.0, 0.875}, {4.0, 2.0}};
  DivisionLine right_line{{0.0, -0.875}, {4.0, -2.0}};
  std::vector<AZone> a_zones;
  double processing_max_x{6.0};
  bool a_zones_enabled{true};

  double extent() const { return band_edges.back(); }

  /// Prius-sized defaults: 1 m x 2 m flank strips beside the rear of the car with a 0.5 m
  /// chamfer at the outer-rear corner.
  static ZoneLayout default_layout()
  {
    ZoneLayout layout;
    const double hw = layout.bumper_half_width;
    layout.a_zones.push_back(
      {Column::L,
       {{-2.0, hw}, {0.0, hw}, {0.0, hw + 0.5}, {-0.5, hw + 1.0}, {-2.0, hw + 1.0}}});
    layout.a_zones.push_back(
      {Column::R,
       {{-2.0, -hw - 1.0}, {-0.5, -hw - 1.0}, {0.0, -hw - 0.5}, {0.0, -hw}, {-2.0, -hw}}});
    return layout;
  }

  /// Checks the layout invariants and normalizes A-zone orientation.
  void validate()
  {
    if (!(bumper_half_width > 0.0) || !std::isfinite(bumper_half_width)) {
      throw ValidationError("bumper_half_width must be positive");
    }
    double prev = 0.0;
    for (double edge : band_edges) {
      if (!(edge > prev) || !std::isfinite(edge)) {
        throw ValidationError("band_edges must be positive and strictly increasing");
      }
      prev = edge;
    }
    if (band_edges.back() != 4.0) {
      throw ValidationError("the last band edge (zone extent) must be 4 m");
    }
    if (!(processing_max_x >= band_edges.back())) {
      throw ValidationError("processing_max_x must not be below the zone extent");
    }
    for (const auto * line : {&left_line, &right_line}) {
      if (line->p0 == line->p1 || line->p0.x == line->p1.x) {
        throw ValidationError("division lines need two points with distinct x");
      }
    }
    for (double x : {0.0, band_edges.back()}) {
      if (!(left_line.y_at(x) > right_line.y_at(x))) {
        throw ValidationError("division lines intersect within the zone extent");
      }
    }
    for (auto & az : a_zones) {
      if (az.side == Column::C) {
        throw ValidationError("A-zones must be on the left or right side");
      }
      if (az.polygon.size() < 3) {
        throw ValidationError("A-zone polygon needs at least 3 vertices");
      }
      if (signed_area(az.polygon) < 0.0) {
        std::reverse(az.polygon.begin(), az.polygon.end());
      }
      for (std::size_t i = 0, n = az.polygon.size(); i < n; ++i) {
        const auto & a = az.polygon[i];
        const auto & b = az.polygon[(i + 1) % n];
        const auto & c = az.polygon[(i + 2) % n];
        if ((b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x) < 0.0) {
          throw ValidationError("A-zone polygons must be convex");
        }
        if (a.x > 0.0) {
          throw ValidationError("A-zones must lie beside the vehicle (x <= 0)");
        }
      }
    }
  }
};

/// Euclidean distance to the bumper segment {x = 0, |y| <= half width}.
inline double distance_to_bumper(const GroundPoint & p, const ZoneLayout & layout)
{
  const double lateral = std::max(0.0, std::abs(p.y) - layout.bumper_half_width);
  return std::hypot(p.x, lateral);
}

/// Points exactly on a division line go to C.
inline Column classify_column(const GroundPoint & p, const ZoneLayout & layout)
{
  if (layout.left_line.offset(p) > 0.0) {
    return Column::L;
  }
  if (layout.right_line.offset(p) < 0.0) {
    return Column::R;
  }
  return Column::C;
}

/// Band k covers (edge[k-1], edge[k]] with edge[0] = 0; distance 0 is band 1. nullopt past the
/// last edge.
inline std::optional<int> classify_band(double distance, const ZoneLayout & layout)
{
  for (std::size_t k = 0; k < layout.band_edges.size(); ++k) {
    if (distance <= layout.band_edges[k]) {
      return static_cast<int>(k) + 1;
    }
  }
  return std::nullopt;
}

inline ZoneRef locate(const GroundPoint & p, const ZoneLayout & layout)
{
  // A-zones sit beside the flanks (x <= 0), so they are tested before the rearward filter.
  if (layout.a_zones_enabled) {
    for (const auto & az : layout.a_zones) {
      if (convex_contains(az.polygon, p)) {
        return ZoneRef::a_zone(az.side);
      }
    }
  }
  if (!(p.x > 0.0) || !(p.x < layout.processing_max_x)) {
    return ZoneRef::outside();
  }
  const auto band = classify_band(distance_to_bumper(p, layout), layout);
  if (!band) {
    return ZoneRef::outside();
  }
  return ZoneRef::in_zone(classify_column(p, layout), *band);
}

struct ZonePolygon
{
  ZoneRef zone;
  Polygon polygon;
};

namespace detail
{

/// Offset curve of the bumper segment at `radius`, for x >= 0, from the right (-y) end to the
/// left (+y) end.
inline Polygon bumper_offset_curve(double half_width, double radius, int arc_resolution)
{
  Polygon curve;
  curve.reserve(2 * static_cast<std::size_t>(arc_resolution) + 2);
  const double quarter = std::numbers::pi / 2.0;
  for (int i = 0; i <= arc_resolution; ++i) {
    const double theta = -quarter + quarter * i / arc_resolution;
    curve.push_back({radius * std::cos(theta), -half_width + radius * std::sin(theta)});
  }
  for (int i = 0; i <= arc_resolution; ++i) {
    const double theta = quarter * i / arc_resolution;
    curve.push_back({radius * std::cos(theta), half_width + radius * std::sin(theta)});
  }
  // pin the exact axis crossings
  curve.front().x = 0.0;
  curve[static_cast<std::size_t>(arc_resolution)] = {radius, -half_width};
  curve[static_cast<std::size_t>(arc_resolution) + 1] = {radius, half_width};
  curve.back().x = 0.0;
  return curve;
}

inline Polygon dedupe(const Polygon & in)
{
  Polygon out;
  for (const auto & p : in) {
    if (out.empty() || !(out.back() == p)) {
      out.push_back(p);
    }
  }
  while (out.size() > 1 && out.front() == out.back()) {
    out.pop_back();
  }
  return out;
}

/// Sutherland-Hodgman against the half-plane sign * f(p) >= 0 for a linear f.
template <class SignedFn>
Polygon clip_half_plane(const Polygon & poly, SignedFn && f)
{
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto & a = poly[i];
    const auto & b = poly[(i + 1) % n];
    const double fa = f(a);
    const double fb = f(b);
    if (fa >= 0.0) {
      out.push_back(a);
    }
    if ((fa >= 0.0) != (fb >= 0.0)) {
      const double t = fa / (fa - fb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return dedupe(out);
}

}  // namespace detail

/// Polygons approximating every sub-zone (12 in-zone bands, then A-zones when enabled).
/// Arcs around the bumper corners are sampled with `arc_resolution` segments per quarter
/// circle; vertices lie on the true boundary.
inline std::vector<ZonePolygon> zone_polygons(ZoneLayout layout, int arc_resolution)
{
  if (arc_resolution < 1) {
    throw ValidationError("arc_resolution must be at least 1");
  }
  layout.validate();
  const double hw = layout.bumper_half_width;

  std::vector<ZonePolygon> zones;
  double inner_radius = 0.0;
  std::vector<Polygon> rings;
  for (double outer_radius : layout.band_edges) {
    Polygon ring = detail::bumper_offset_curve(hw, outer_radius, arc_resolution);
    Polygon inner = detail::bumper_offset_curve(hw, inner_radius, arc_resolution);
    ring.insert(ring.end(), inner.rbegin(), inner.rend());
    rings.push_back(detail::dedupe(ring));
    inner_radius = outer_radius;
  }

  const auto & left = layout.left_line;
  const auto & right = layout.right_line;
  for (Column c : {Column::L, Column::C, Column::R}) {
    for (std::size_t k = 0; k < rings.size(); ++k) {
      Polygon poly = rings[k];
      if (c == Column::L) {
        poly = detail::clip_half_plane(poly, [&](const GroundPoint & p) { return left.offset(p); });
      } else if (c == Column::R) {
        poly =
          detail::clip_half_plane(poly, [&](const GroundPoint & p) { return -right.offset(p); });
      } else {
        poly =
          detail::clip_half_plane(poly, [&](const GroundPoint & p) { return -left.offset(p); });
        poly =
          detail::clip_half_plane(poly, [&](const GroundPoint & p) { return right.offset(p); });
      }
      zones.push_back({ZoneRef::in_zone(c, static_cast<int>(k) + 1), std::move(poly)});
    }
  }
  if (layout.a_zones_enabled) {
    for (const auto & az : layout.a_zones) {
      zones.push_back({ZoneRef::a_zone(az.side), az.polygon});
    }
  }
  return zones;
}

}  // namespace parkrisk::geometry

#endif  // PARKRISK__GEOMETRY_HPP_
