#include "gpd/metrics/map.hpp"

#include <algorithm>
#include <limits>

#include "gpd/scene/assignment.hpp"
#include "gpd/scene/geometry.hpp"

namespace gpd::metrics {

std::vector<scene::Vec2> sample_points(const scene::MapLines& lines, double spacing) {
  std::vector<scene::Vec2> out;
  for (const auto& line : lines) {
    const auto r = scene::resample_polyline(line, spacing);
    out.insert(out.end(), r.points().begin(), r.points().end());
  }
  return out;
}

F1Result map_f1(const std::vector<scene::Vec2>& pred, const std::vector<scene::Vec2>& gt, double threshold) {
  if (gt.empty()) throw MetricError("map_f1: empty ground truth");
  F1Result r;
  if (pred.empty()) return r;
  scene::CostMatrix cost(pred.size(), gt.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) cost(i, j) = scene::distance(pred[i], gt[j]);
  }
  const auto match = scene::solve_assignment(cost);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const long j = match.row_to_col[i];
    if (j >= 0 && cost(i, static_cast<std::size_t>(j)) < threshold) ++r.true_positives;
  }
  if (r.true_positives == 0) return r;
  const double tp = static_cast<double>(r.true_positives);
  r.precision = tp / static_cast<double>(pred.size());
  r.recall = tp / static_cast<double>(gt.size());
  r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double lateral_l2(const std::vector<scene::Vec2>& pred, const scene::MapLines& gt) {
  if (pred.empty() || gt.empty()) throw MetricError("lateral_l2: empty input");
  double total = 0.0;
  for (const auto& p : pred) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& line : gt) best = std::min(best, scene::point_polyline_distance(p, line));
    total += best;
  }
  return total / static_cast<double>(pred.size());
}

namespace {

double mean_nearest_sq(const std::vector<scene::Vec2>& from, const std::vector<scene::Vec2>& to) {
  double total = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) {
      const scene::Vec2 d = p - q;
      best = std::min(best, scene::dot(d, d));
    }
    total += best;
  }
  return total / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const std::vector<scene::Vec2>& a, const std::vector<scene::Vec2>& b) {
  if (a.empty() || b.empty()) throw MetricError("chamfer: empty point set");
  return 0.5 * (mean_nearest_sq(a, b) + mean_nearest_sq(b, a));
}

}  // namespace gpd::metrics
