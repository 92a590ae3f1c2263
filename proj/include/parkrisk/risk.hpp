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

#ifndef PARKRISK__RISK_HPP_
#define PARKRISK__RISK_HPP_

#include "parkrisk/errors.hpp"
#include "parkrisk/geometry.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parkrisk::risk
{

using geometry::Column;
using geometry::ZoneKind;
using geometry::ZoneRef;

enum class RiskLevel { VeryLow = 0, Low = 1, Moderate = 2, High = 3, VeryHigh = 4 };

inline constexpr std::array<RiskLevel, 5> kAllLevels{
  RiskLevel::VeryLow, RiskLevel::Low, RiskLevel::Moderate, RiskLevel::High, RiskLevel::VeryHigh};

inline std::string_view to_string(RiskLevel level)
{
  switch (level) {
    case RiskLevel::VeryLow:
      return "very_low";
    case RiskLevel::Low:
      return "low";
    case RiskLevel::Moderate:
      return "moderate";
    case RiskLevel::High:
      return "high";
    case RiskLevel::VeryHigh:
      return "very_high";
  }
  return "?";
}

inline std::optional<RiskLevel> parse_risk_level(std::string_view s)
{
  for (RiskLevel level : kAllLevels) {
    if (s == to_string(level)) {
      return level;
    }
  }
  return std::nullopt;
}

/// Display color names of the five-level scale; hues are left to the renderer.
inline std::string_view color_of(RiskLevel level)
{
  switch (level) {
    case RiskLevel::VeryLow:
      return "gray";
    case RiskLevel::Low:
      return "green";
    case RiskLevel::Moderate:
      return "yellow";
    case RiskLevel::High:
      return "orange";
    case RiskLevel::VeryHigh:
      return "red";
  }
  return "?";
}

/// Dataset class code (risk 0..3). VeryLow has none.
inline std::optional<int> class_code(RiskLevel level)
{
  if (level == RiskLevel::VeryLow) {
    return std::nullopt;
  }
  return static_cast<int>(level) - 1;
}

inline std::optional<RiskLevel> from_class_code(int code)
{
  if (code < 0 || code > 3) {
    return std::nullopt;
  }
  return static_cast<RiskLevel>(code + 1);
}

enum class GazeTarget { Left, Center, Right, Unknown };

inline constexpr std::array<GazeTarget, 3> kMirrorTargets{
  GazeTarget::Left, GazeTarget::Center, GazeTarget::Right};

inline std::string_view to_string(GazeTarget g)
{
  switch (g) {
    case GazeTarget::Left:
      return "left";
    case GazeTarget::Center:
      return "center";
    case GazeTarget::Right:
      return "right";
    case GazeTarget::Unknown:
      return "unknown";
  }
  return "?";
}

inline std::optional<GazeTarget> parse_gaze(std::string_view s)
{
  for (GazeTarget g : {GazeTarget::Left, GazeTarget::Center, GazeTarget::Right,
                       GazeTarget::Unknown}) {
    if (s == to_string(g)) {
      return g;
    }
  }
  return std::nullopt;
}

inline GazeTarget mirror(GazeTarget g)
{
  return g == GazeTarget::Left ? GazeTarget::Right : g == GazeTarget::Right ? GazeTarget::Left : g;
}

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

struct RiskParameters
{
  double reverse_speed{kmh_to_mps(5.0)};  // m/s
  double reaction_time{1.5};              // s
  RiskLevel a_zone_base{RiskLevel::Low};

  void validate() const
  {
    if (!(reverse_speed > 0.0) || !std::isfinite(reverse_speed)) {
      throw ValidationError("reverse_speed must be positive");
    }
    if (!(reaction_time > 0.0) || !std::isfinite(reaction_time)) {
      throw ValidationError("reaction_time must be positive");
    }
  }
};

inline double ttc(double distance, double speed)
{
  if (!(speed > 0.0)) {
    throw ValidationError("ttc requires a positive closing speed");
  }
  return distance / speed;
}

/// Distance covered during the reaction window. Braking distance is ignored at parking speeds.
inline double stopping_distance(const RiskParameters & params)
{
  return params.reverse_speed * params.reaction_time;
}

inline RiskLevel base_risk(const ZoneRef & zone, const RiskParameters & params)
{
  switch (zone.kind) {
    case ZoneKind::Outside:
      return RiskLevel::VeryLow;
    case ZoneKind::AZone:
      return params.a_zone_base;
    case ZoneKind::InZone:
      break;
  }
  switch (zone.band) {
    case 1:
      return zone.column == Column::C ? RiskLevel::VeryHigh : RiskLevel::High;
    case 2:
      return RiskLevel::High;
    case 3:
      return RiskLevel::Moderate;
    default:
      return RiskLevel::Low;
  }
}

inline bool is_aware(Column column, GazeTarget gaze)
{
  switch (gaze) {
    case GazeTarget::Left:
      return column == Column::L;
    case GazeTarget::Center:
      return column == Column::C;
    case GazeTarget::Right:
      return column == Column::R;
    case GazeTarget::Unknown:
      break;
  }
  return false;
}

/// Unawareness promotes High and Moderate by one level; nothing else moves.
inline RiskLevel escalate(RiskLevel base, bool aware)
{
  if (aware) {
    return base;
  }
  switch (base) {
    case RiskLevel::High:
      return RiskLevel::VeryHigh;
    case RiskLevel::Moderate:
      return RiskLevel::High;
    default:
      return base;
  }
}

inline RiskLevel assess(const ZoneRef & zone, GazeTarget gaze, const RiskParameters & params)
{
  if (zone.is_outside()) {
    return RiskLevel::VeryLow;
  }
  if (zone == ZoneRef::in_zone(Column::C, 1)) {
    return RiskLevel::VeryHigh;
  }
  return escalate(base_risk(zone, params), is_aware(zone.column, gaze));
}

struct RiskMatrixEntry
{
  ZoneRef zone;
  RiskLevel aware;
  RiskLevel unaware;
};

/// Zone x awareness table: 12 in-zone rows (L1..L4, C1..C4, R1..R4), then AL, AR, OUT.
class RiskMatrix
{
public:
  explicit RiskMatrix(const RiskParameters & params)
  {
    auto zones = geometry::all_in_zone_refs();
    zones.push_back(ZoneRef::a_zone(Column::L));
    zones.push_back(ZoneRef::a_zone(Column::R));
    zones.push_back(ZoneRef::outside());
    for (const auto & z : zones) {
      // Outside has no column; any gaze gives the same level.
      const GazeTarget matching = z.column == Column::L   ? GazeTarget::Left
                                  : z.column == Column::R ? GazeTarget::Right
                                                          : GazeTarget::Center;
      entries_.push_back({z, assess(z, matching, params), assess(z, GazeTarget::Unknown, params)});
    }
  }

  const std::vector<RiskMatrixEntry> & entries() const { return entries_; }

  RiskLevel at(const ZoneRef & zone, bool aware) const
  {
    for (const auto & e : entries_) {
      if (e.zone == zone) {
        return aware ? e.aware : e.unaware;
      }
    }
    throw ValidationError("zone not in risk matrix: " + zone.label());
  }

  /// Level of each zone as seen with the driver looking at `gaze`.
  RiskLevel for_gaze(const ZoneRef & zone, GazeTarget gaze) const
  {
    return at(zone, zone.is_outside() || is_aware(zone.column, gaze));
  }

private:
  std::vector<RiskMatrixEntry> entries_;
};

inline RiskMatrix risk_matrix(const RiskParameters & params) { return RiskMatrix(params); }

}  // namespace parkrisk::risk

#endif  // PARKRISK__RISK_HPP_
