#pragma once

#include <vector>

#include "gpd/scene/types.hpp"

namespace gpd::codec {

/// Decoded lane hypotheses: Q lanes of P points each, plus visibility.
struct LaneSet {
  std::size_t points_per_lane = 0;
  std::vector<std::vector<scene::Vec2>> lanes;
  std::vector<double> prob;

  std::size_t size() const { return lanes.size(); }
};

/// Orients a polyline so it starts at the endpoint with smaller x (then smaller y).
scene::Polyline canonical_direction(const scene::Polyline& line);

/// Training targets from an ego-frame map: clip to the region, drop pieces
/// shorter than `min_length`, orient canonically, and keep the `max_lines`
/// pieces closest to the ego origin (nearest first).
scene::MapLines target_lines(const scene::MapLines& ego_map, double half_extent, std::size_t max_lines,
                             double min_length = 1.0);

/// Each line resampled to exactly `points` arc-length-uniform points.
std::vector<std::vector<scene::Vec2>> resample_targets(const scene::MapLines& lines, std::size_t points);

/// Lanes with prob >= threshold as polylines, coordinates clamped into the
/// region; degenerate lanes (fewer than two distinct points) are skipped.
scene::MapLines visible_lines(const LaneSet& set, double half_extent, double threshold = 0.5);

}  // namespace gpd::codec
