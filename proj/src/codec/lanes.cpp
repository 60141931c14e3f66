#include "gpd/codec/lanes.hpp"

#include <algorithm>
#include <limits>

#include "gpd/scene/geometry.hpp"

namespace gpd::codec {

scene::Polyline canonical_direction(const scene::Polyline& line) {
  const scene::Vec2 a = line.points().front();
  const scene::Vec2 b = line.points().back();
  const bool flip = b.x < a.x || (b.x == a.x && b.y < a.y);
  if (!flip) return line;
  std::vector<scene::Vec2> pts(line.points().rbegin(), line.points().rend());
  return scene::Polyline(std::move(pts));
}

scene::MapLines target_lines(const scene::MapLines& ego_map, double half_extent, std::size_t max_lines,
                             double min_length) {
  struct Ranked {
    double dist;
    std::size_t order;
    scene::Polyline line;
  };
  std::vector<Ranked> ranked;
  for (const auto& piece : scene::clip_map_to_region(ego_map, half_extent)) {
    if (piece.length() < min_length) continue;
    ranked.push_back({scene::point_polyline_distance({0.0, 0.0}, piece), ranked.size(), canonical_direction(piece)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.dist < b.dist; });
  scene::MapLines out;
  for (std::size_t i = 0; i < ranked.size() && i < max_lines; ++i) out.push_back(std::move(ranked[i].line));
  return out;
}

std::vector<std::vector<scene::Vec2>> resample_targets(const scene::MapLines& lines, std::size_t points) {
  std::vector<std::vector<scene::Vec2>> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(scene::resample_to_count(l, points));
  return out;
}

scene::MapLines visible_lines(const LaneSet& set, double half_extent, double threshold) {
  scene::MapLines out;
  for (std::size_t q = 0; q < set.size(); ++q) {
    if (set.prob[q] < threshold) continue;
    std::vector<scene::Vec2> pts;
    for (auto p : set.lanes[q]) {
      p.x = std::clamp(p.x, -half_extent, half_extent);
      p.y = std::clamp(p.y, -half_extent, half_extent);
      if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
    }
    if (pts.size() >= 2) out.emplace_back(std::move(pts));
  }
  return out;
}

}  // namespace gpd::codec
