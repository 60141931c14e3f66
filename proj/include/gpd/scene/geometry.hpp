#pragma once

#include <array>

#include "gpd/scene/types.hpp"

namespace gpd::scene {

/// Re-expresses a frame around its ego vehicle: +x forward, +y left.
/// The ego pose becomes (0, 0, 0).
SceneFrame to_ego_frame(const SceneFrame& frame);
/// Inverse of to_ego_frame given the original global ego pose.
SceneFrame from_ego_frame(const SceneFrame& local, const Pose2D& ego_global);

MapLines transform_map(const MapLines& map, const Pose2D& frame, bool to_local);

/// Points at arc-length multiples of `spacing`, endpoints included.
/// Throws GeometryError on zero-length input or non-positive spacing.
Polyline resample_polyline(const Polyline& line, double spacing);
/// Exactly `count` points evenly spaced in arc length (count >= 2).
std::vector<Vec2> resample_to_count(const Polyline& line, std::size_t count);
/// Point at arc length s (clamped to [0, length]) and the tangent heading there.
Pose2D point_at_arclength(const Polyline& line, double s);

/// Clips lines to the axis-aligned square |x|, |y| <= half_extent.
/// Lines leaving and re-entering the square are split into separate pieces.
MapLines clip_map_to_region(const MapLines& map, double half_extent = 32.0);

/// Distance from p to the closed segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double point_polyline_distance(Vec2 p, const Polyline& line);

/// Corners of an oriented box, counter-clockwise.
std::array<Vec2, 4> box_corners(const Pose2D& center, double length, double width);

}  // namespace gpd::scene

namespace gpd::scene {

/// Strict separating-axis overlap test for two oriented boxes.
/// Boxes that only touch along an edge or corner do not overlap.
bool boxes_overlap(const Pose2D& a, double a_len, double a_wid, const Pose2D& b, double b_len, double b_wid);

}  // namespace gpd::scene
