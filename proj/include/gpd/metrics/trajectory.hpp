#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gpd/scene/types.hpp"

namespace gpd::metrics {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Predicted and ground-truth positions of one entity, frame-aligned.
/// Only frames with visible[t] != 0 are scored.
struct TrajPair {
  std::vector<scene::Vec2> pred;
  std::vector<scene::Vec2> gt;
  std::vector<std::uint8_t> visible;
};

double ade(const TrajPair& pair);
/// Error at the last visible frame.
double fde(const TrajPair& pair);

/// One oriented box at one frame.
struct Box {
  std::int64_t id = 0;
  scene::Pose2D pose;
  double length = 4.5;
  double width = 2.0;
};

/// Percentage of entities that overlap another entity in at least one
/// frame. `frames[t]` lists the boxes present at frame t; the denominator is
/// the number of distinct ids appearing in any frame. Returns 0 when empty.
double collision_rate(const std::vector<std::vector<Box>>& frames);
/// Same over a scenario: ego plus visible agents per frame.
double collision_rate(const scene::Scenario& s);
/// Ids that collided at least once, sorted.
std::vector<std::int64_t> colliding_ids(const std::vector<std::vector<Box>>& frames);

}  // namespace gpd::metrics
