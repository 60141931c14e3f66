#include "gpd/scene/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gpd/scene/error.hpp"

namespace gpd::scene {

namespace {

AgentState map_agent(const AgentState& a, const Pose2D& frame, bool to_local) {
  AgentState out = a;
  out.pose = to_local ? relative(frame, a.pose) : compose(frame, a.pose);
  return out;
}

}  // namespace

MapLines transform_map(const MapLines& map, const Pose2D& frame, bool to_local) {
  MapLines out;
  out.reserve(map.size());
  for (const auto& line : map) {
    std::vector<Vec2> pts;
    pts.reserve(line.size());
    for (const auto& p : line.points()) pts.push_back(to_local ? apply_inverse(frame, p) : apply(frame, p));
    // Rounding can merge neighbours that were distinct; drop those.
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() >= 2) out.emplace_back(std::move(pts));
  }
  return out;
}

SceneFrame to_ego_frame(const SceneFrame& frame) {
  SceneFrame out;
  out.t_index = frame.t_index;
  out.ego = frame.ego;
  out.ego.pose = {0.0, 0.0, 0.0};
  out.agents.reserve(frame.agents.size());
  for (const auto& a : frame.agents) out.agents.push_back(map_agent(a, frame.ego.pose, true));
  out.map = transform_map(frame.map, frame.ego.pose, true);
  return out;
}

SceneFrame from_ego_frame(const SceneFrame& local, const Pose2D& ego_global) {
  SceneFrame out;
  out.t_index = local.t_index;
  out.ego = local.ego;
  out.ego.pose = compose(ego_global, local.ego.pose);
  for (const auto& a : local.agents) out.agents.push_back(map_agent(a, ego_global, false));
  out.map = transform_map(local.map, ego_global, false);
  return out;
}

Polyline resample_polyline(const Polyline& line, double spacing) {
  if (!(spacing > 0.0)) throw GeometryError("resample spacing must be positive");
  const double total = line.length();
  if (!(total > 0.0)) throw GeometryError("cannot resample a zero-length polyline");

  const auto& pts = line.points();
  std::vector<Vec2> out{pts.front()};
  std::size_t seg = 0;
  double seg_start = 0.0;
  for (std::size_t k = 1;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (s >= total - 1e-9 * std::max(1.0, total)) break;
    while (seg + 1 < pts.size() - 1 && seg_start + distance(pts[seg], pts[seg + 1]) < s) {
      seg_start += distance(pts[seg], pts[seg + 1]);
      ++seg;
    }
    const double seg_len = distance(pts[seg], pts[seg + 1]);
    const double u = std::clamp((s - seg_start) / seg_len, 0.0, 1.0);
    const Vec2 p = pts[seg] + u * (pts[seg + 1] - pts[seg]);
    if (!(p == out.back())) out.push_back(p);
  }
  if (!(pts.back() == out.back())) out.push_back(pts.back());
  return Polyline(std::move(out));
}

Pose2D point_at_arclength(const Polyline& line, double s) {
  const auto& pts = line.points();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = distance(pts[i], pts[i + 1]);
    if (acc + len >= s || i + 2 == pts.size()) {
      const double u = std::clamp((s - acc) / len, 0.0, 1.0);
      const Vec2 d = pts[i + 1] - pts[i];
      const Vec2 p = pts[i] + u * d;
      return {p.x, p.y, std::atan2(d.y, d.x)};
    }
    acc += len;
  }
  return {pts.back().x, pts.back().y, 0.0};
}

std::vector<Vec2> resample_to_count(const Polyline& line, std::size_t count) {
  if (count < 2) throw GeometryError("resample_to_count needs count >= 2");
  const double total = line.length();
  std::vector<Vec2> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (k + 1 == count) {
      out.push_back(line.points().back());
    } else {
      out.push_back(point_at_arclength(line, total * static_cast<double>(k) / static_cast<double>(count - 1)).position());
    }
  }
  return out;
}

MapLines clip_map_to_region(const MapLines& map, double half_extent) {
  const double h = half_extent;
  MapLines out;
  auto flush = [&out](std::vector<Vec2>& piece) {
    if (piece.size() >= 2) out.emplace_back(std::move(piece));
    piece.clear();
  };
  for (const auto& line : map) {
    std::vector<Vec2> piece;
    const auto& pts = line.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      // Liang-Barsky against the square.
      const Vec2 a = pts[i];
      const Vec2 d = pts[i + 1] - a;
      double t0 = 0.0;
      double t1 = 1.0;
      bool inside = true;
      const double p[4] = {-d.x, d.x, -d.y, d.y};
      const double q[4] = {a.x + h, h - a.x, a.y + h, h - a.y};
      for (int k = 0; k < 4 && inside; ++k) {
        if (p[k] == 0.0) {
          if (q[k] < 0.0) inside = false;
        } else {
          const double r = q[k] / p[k];
          if (p[k] < 0.0) {
            t0 = std::max(t0, r);
          } else {
            t1 = std::min(t1, r);
          }
        }
      }
      if (!inside || t0 > t1) {
        flush(piece);
        continue;
      }
      auto at = [&](double t) {
        if (t == 0.0) return a;
        if (t == 1.0) return pts[i + 1];
        Vec2 v = a + t * d;
        v.x = std::clamp(v.x, -h, h);
        v.y = std::clamp(v.y, -h, h);
        return v;
      };
      const Vec2 s = at(t0);
      const Vec2 e = at(t1);
      if (!piece.empty() && !(piece.back() == s)) flush(piece);
      if (piece.empty()) piece.push_back(s);
      if (!(piece.back() == e)) piece.push_back(e);
      if (t1 < 1.0) flush(piece);
    }
    flush(piece);
  }
  return out;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double point_polyline_distance(Vec2 p, const Polyline& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  }
  return best;
}

std::array<Vec2, 4> box_corners(const Pose2D& c, double length, double width) {
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {apply(c, {hl, hw}), apply(c, {-hl, hw}), apply(c, {-hl, -hw}), apply(c, {hl, -hw})};
}

}  // namespace gpd::scene

namespace gpd::scene {

bool boxes_overlap(const Pose2D& a, double a_len, double a_wid, const Pose2D& b, double b_len, double b_wid) {
  const auto ca = box_corners(a, a_len, a_wid);
  const auto cb = box_corners(b, b_len, b_wid);
  const double headings[4] = {a.heading, a.heading + std::numbers::pi / 2, b.heading, b.heading + std::numbers::pi / 2};
  for (double h : headings) {
    const Vec2 axis{std::cos(h), std::sin(h)};
    double amin = dot(ca[0], axis), amax = amin, bmin = dot(cb[0], axis), bmax = bmin;
    for (int i = 1; i < 4; ++i) {
      amin = std::min(amin, dot(ca[i], axis));
      amax = std::max(amax, dot(ca[i], axis));
      bmin = std::min(bmin, dot(cb[i], axis));
      bmax = std::max(bmax, dot(cb[i], axis));
    }
    if (!(amax > bmin && bmax > amin)) return false;
  }
  return true;
}

}  // namespace gpd::scene
