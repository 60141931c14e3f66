#include "gpd/metrics/trajectory.hpp"

#include <set>

#include "gpd/scene/geometry.hpp"

namespace gpd::metrics {

namespace {

void check(const TrajPair& p) {
  if (p.pred.size() != p.gt.size() || p.gt.size() != p.visible.size()) {
    throw MetricError("trajectory pair has mismatched lengths");
  }
}

}  // namespace

double ade(const TrajPair& pair) {
  check(pair);
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < pair.gt.size(); ++t) {
    if (!pair.visible[t]) continue;
    total += scene::distance(pair.pred[t], pair.gt[t]);
    ++n;
  }
  if (n == 0) throw MetricError("ade: no visible frames");
  return total / static_cast<double>(n);
}

double fde(const TrajPair& pair) {
  check(pair);
  for (std::size_t t = pair.gt.size(); t-- > 0;) {
    if (pair.visible[t]) return scene::distance(pair.pred[t], pair.gt[t]);
  }
  throw MetricError("fde: no visible frames");
}

std::vector<std::int64_t> colliding_ids(const std::vector<std::vector<Box>>& frames) {
  std::set<std::int64_t> hit;
  for (const auto& boxes : frames) {
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        const Box& a = boxes[i];
        const Box& b = boxes[j];
        if (scene::boxes_overlap(a.pose, a.length, a.width, b.pose, b.length, b.width)) {
          hit.insert(a.id);
          hit.insert(b.id);
        }
      }
    }
  }
  return {hit.begin(), hit.end()};
}

double collision_rate(const std::vector<std::vector<Box>>& frames) {
  std::set<std::int64_t> seen;
  for (const auto& boxes : frames) {
    for (const auto& b : boxes) seen.insert(b.id);
  }
  if (seen.empty()) return 0.0;
  return 100.0 * static_cast<double>(colliding_ids(frames).size()) / static_cast<double>(seen.size());
}

double collision_rate(const scene::Scenario& s) {
  std::vector<std::vector<Box>> frames;
  for (const auto& f : s.frames) {
    auto& boxes = frames.emplace_back();
    boxes.push_back({f.ego.id, f.ego.pose, f.ego.length, f.ego.width});
    for (const auto& a : f.agents) {
      if (a.visible) boxes.push_back({a.id, a.pose, a.length, a.width});
    }
  }
  return collision_rate(frames);
}

}  // namespace gpd::metrics
