#pragma once

#include <cstdint>
#include <string>

#include "gpd/scene/types.hpp"

namespace gpd::synth {

enum class RoadKind { Straight, Arc, TIntersection, Crossroads };

RoadKind parse_road_kind(const std::string& name);
std::string to_string(RoadKind kind);

struct RoadSpec {
  RoadKind kind = RoadKind::Straight;
  int lane_count = 2;
  double lane_width = 3.5;
  /// Radius of the road centre through the curve (arc kind only).
  double arc_radius = 50.0;
  /// Arc length of the through lanes.
  double length = 600.0;
};

/// Throws ConfigError on an invalid spec.
void validate(const RoadSpec& spec);

/// Lanes [0, traffic_lanes) all run in the same direction and never cross;
/// the remaining lanes (side/cross roads) are map-only.
struct RoadNetwork {
  scene::MapLines lanes;
  std::size_t traffic_lanes = 0;
  /// Arc length on the traffic lanes of the most interesting feature
  /// (curve entry or junction); scenarios start the ego shortly before it.
  double focus_s = 0.0;
};

RoadNetwork gen_road_network(const RoadSpec& spec, std::uint64_t seed);

/// One centreline per lane, points spaced at most 1 m apart.
scene::MapLines gen_road(const RoadSpec& spec, std::uint64_t seed);

}  // namespace gpd::synth
