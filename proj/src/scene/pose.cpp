#include <cmath>
#include <numbers>

#include "gpd/scene/error.hpp"
#include "gpd/scene/types.hpp"

namespace gpd::scene {

double normalize_angle(double radians) {
  double r = std::remainder(radians, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

Pose2D compose(const Pose2D& a, const Pose2D& b) {
  const double c = std::cos(a.heading);
  const double s = std::sin(a.heading);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, normalize_angle(a.heading + b.heading)};
}

Pose2D inverse(const Pose2D& p) {
  const double c = std::cos(p.heading);
  const double s = std::sin(p.heading);
  return {-c * p.x - s * p.y, s * p.x - c * p.y, normalize_angle(-p.heading)};
}

Pose2D relative(const Pose2D& frame, const Pose2D& p) {
  const Vec2 local = apply_inverse(frame, p.position());
  return {local.x, local.y, normalize_angle(p.heading - frame.heading)};
}

Vec2 apply(const Pose2D& frame, Vec2 local) {
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  return {frame.x + c * local.x - s * local.y, frame.y + s * local.x + c * local.y};
}

Vec2 apply_inverse(const Pose2D& frame, Vec2 world) {
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  const double dx = world.x - frame.x;
  const double dy = world.y - frame.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

bool is_finite(const Pose2D& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.heading);
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw GeometryError("polyline needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y)) {
      throw GeometryError("polyline point is not finite");
    }
    if (i > 0 && points_[i] == points_[i - 1]) {
      throw GeometryError("polyline has repeated consecutive point");
    }
  }
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) total += distance(points_[i - 1], points_[i]);
  return total;
}

void validate(const Scenario& s) {
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ConfigError("scenario dt must be positive");
  const std::size_t n = s.agent_count();
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    const SceneFrame& fr = s.frames[f];
    if (f > 0 && fr.t_index != s.frames[f - 1].t_index + 1) {
      throw ConfigError("frame t_index must increase by 1 (frame " + std::to_string(f) + ")");
    }
    if (!fr.ego.visible) throw ConfigError("ego must be visible");
    if (fr.agents.size() != n) throw ConfigError("agent roster size changes between frames");
    for (std::size_t a = 0; a < n; ++a) {
      if (fr.agents[a].id != s.frames.front().agents[a].id) throw ConfigError("agent roster order changes");
      for (std::size_t b = 0; b < a; ++b) {
        if (fr.agents[a].id == fr.agents[b].id) throw ConfigError("duplicate agent id");
      }
    }
    auto check = [](const AgentState& st) {
      if (!is_finite(st.pose) || !(st.length > 0.0) || !(st.width > 0.0)) {
        throw GeometryError("agent " + std::to_string(st.id) + " has invalid pose or extent");
      }
    };
    check(fr.ego);
    for (const auto& a : fr.agents) check(a);
  }
}

}  // namespace gpd::scene
