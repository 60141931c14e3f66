#pragma once

#include <vector>

#include "gpd/metrics/trajectory.hpp"
#include "gpd/scene/types.hpp"

namespace gpd::metrics {

inline constexpr double kMatchThreshold = 1.5;
inline constexpr double kSampleSpacing = 1.0;

/// All lines resampled at `spacing`, concatenated.
std::vector<scene::Vec2> sample_points(const scene::MapLines& lines, double spacing = kSampleSpacing);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
};

/// Optimal one-to-one point matching under L2 cost; matches closer than
/// `threshold` count as true positives. Throws MetricError on empty GT.
F1Result map_f1(const std::vector<scene::Vec2>& pred, const std::vector<scene::Vec2>& gt,
                double threshold = kMatchThreshold);

/// Mean distance from each predicted point to the nearest GT segment.
double lateral_l2(const std::vector<scene::Vec2>& pred, const scene::MapLines& gt);

/// 0.5 * (mean squared nearest distance a->b + b->a). Units m^2.
double chamfer(const std::vector<scene::Vec2>& a, const std::vector<scene::Vec2>& b);

}  // namespace gpd::metrics
