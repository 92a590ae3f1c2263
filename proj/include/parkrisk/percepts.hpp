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

#ifndef PARKRISK__PERCEPTS_HPP_
#define PARKRISK__PERCEPTS_HPP_

#include "parkrisk/geometry.hpp"
#include "parkrisk/risk.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parkrisk
{

/// Milliseconds since epoch.
using Timestamp = std::int64_t;

enum class ObjectClass { Pedestrian, Car, Other };

inline std::string_view to_string(ObjectClass c)
{
  switch (c) {
    case ObjectClass::Pedestrian:
      return "pedestrian";
    case ObjectClass::Car:
      return "car";
    case ObjectClass::Other:
      return "other";
  }
  return "other";
}

inline ObjectClass parse_object_class(std::string_view s)
{
  if (s == "pedestrian") {
    return ObjectClass::Pedestrian;
  }
  if (s == "car") {
    return ObjectClass::Car;
  }
  return ObjectClass::Other;
}

/// One object from the exterior detector, in the sensor frame.
struct ExteriorDetection
{
  Timestamp timestamp{0};
  std::string source_id{"lidar0"};
  ObjectClass object_class{ObjectClass::Pedestrian};
  geometry::Point3 position;
  double confidence{1.0};
  std::optional<std::string> track_id;

  friend bool operator==(const ExteriorDetection &, const ExteriorDetection &) = default;
};

/// Mirror the driver is looking at, from the interior monitor.
struct GazeEvent
{
  Timestamp timestamp{0};
  std::string source_id{"dms0"};
  risk::GazeTarget target{risk::GazeTarget::Unknown};
  double confidence{1.0};

  friend bool operator==(const GazeEvent &, const GazeEvent &) = default;
};

/// All objects one exterior source reported for one timestamp.
using DetectionSet = std::vector<ExteriorDetection>;

}  // namespace parkrisk

#endif  // PARKRISK__PERCEPTS_HPP_
