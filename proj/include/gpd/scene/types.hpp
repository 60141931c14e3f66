#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace gpd::scene {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Wraps an angle to (-pi, pi]. Idempotent bit-for-bit.
double normalize_angle(double radians);

/// Planar rigid pose. Heading in radians, kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// a * b: express pose b (given in a's frame) in a's parent frame.
Pose2D compose(const Pose2D& a, const Pose2D& b);
Pose2D inverse(const Pose2D& p);
/// Pose of `p` expressed in the frame of `frame`.
Pose2D relative(const Pose2D& frame, const Pose2D& p);
/// Maps a point from the frame of `frame` to the parent frame.
Vec2 apply(const Pose2D& frame, Vec2 local);
/// Maps a parent-frame point into the frame of `frame`.
Vec2 apply_inverse(const Pose2D& frame, Vec2 world);

bool is_finite(const Pose2D& p);

struct AgentState {
  std::int64_t id = 0;
  Pose2D pose;
  double length = 4.5;
  double width = 2.0;
  bool visible = true;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Ordered point list; at least two points with no repeated neighbours.
class Polyline {
 public:
  Polyline() = default;
  /// Throws GeometryError when the invariant does not hold.
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Vec2& operator[](std::size_t i) const { return points_[i]; }
  double length() const;

  friend bool operator==(const Polyline&, const Polyline&) = default;

 private:
  std::vector<Vec2> points_;
};

using MapLines = std::vector<Polyline>;

struct SceneFrame {
  std::int64_t t_index = 0;
  AgentState ego;
  std::vector<AgentState> agents;
  MapLines map;

  friend bool operator==(const SceneFrame&, const SceneFrame&) = default;
};

struct Scenario {
  double dt = 0.1;
  std::vector<SceneFrame> frames;

  std::size_t agent_count() const { return frames.empty() ? 0 : frames.front().agents.size(); }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws GeometryError / ConfigError describing the first violated invariant.
void validate(const Scenario& s);

}  // namespace gpd::scene
