#include "gpd/synth/road.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gpd/scene/error.hpp"

namespace gpd::synth {

using scene::MapLines;
using scene::Polyline;
using scene::Vec2;

RoadKind parse_road_kind(const std::string& name) {
  if (name == "straight") return RoadKind::Straight;
  if (name == "arc") return RoadKind::Arc;
  if (name == "t-intersection" || name == "t") return RoadKind::TIntersection;
  if (name == "crossroads" || name == "cross") return RoadKind::Crossroads;
  throw ConfigError("unknown road kind '" + name + "' (straight|arc|t-intersection|crossroads)");
}

std::string to_string(RoadKind kind) {
  switch (kind) {
    case RoadKind::Straight: return "straight";
    case RoadKind::Arc: return "arc";
    case RoadKind::TIntersection: return "t-intersection";
    case RoadKind::Crossroads: return "crossroads";
  }
  return "?";
}

void validate(const RoadSpec& spec) {
  if (spec.lane_count < 1) throw ConfigError("lane_count must be >= 1");
  if (!(spec.lane_width >= 2.5) || !std::isfinite(spec.lane_width)) throw ConfigError("lane_width must be >= 2.5 m");
  if (!(spec.length >= 100.0) || !std::isfinite(spec.length)) throw ConfigError("road length must be >= 100 m");
  if (spec.kind == RoadKind::Arc && !(spec.arc_radius > spec.lane_count * spec.lane_width)) {
    throw ConfigError("arc_radius must exceed lane_count * lane_width");
  }
}

namespace {

// Straight run from a to b with spacing <= 1 m, appended without duplicating the start.
void append_straight(std::vector<Vec2>& pts, Vec2 a, Vec2 b) {
  const double len = scene::distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len)));
  for (int k = pts.empty() ? 0 : 1; k <= n; ++k) pts.push_back(a + (static_cast<double>(k) / n) * (b - a));
}

double lane_offset(const RoadSpec& spec, int i) { return (i - 0.5 * (spec.lane_count - 1)) * spec.lane_width; }

}  // namespace

RoadNetwork gen_road_network(const RoadSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RoadNetwork net;
  const double L = spec.length;
  const double half_road = 0.5 * spec.lane_count * spec.lane_width;

  switch (spec.kind) {
    case RoadKind::Straight: {
      for (int i = 0; i < spec.lane_count; ++i) {
        std::vector<Vec2> pts;
        append_straight(pts, {0.0, lane_offset(spec, i)}, {L, lane_offset(spec, i)});
        net.lanes.emplace_back(std::move(pts));
      }
      net.focus_s = 150.0 + 50.0 * unit(rng);
      break;
    }
    case RoadKind::Arc: {
      // Lead-in along +x, a 90 degree turn of radius arc_radius (measured at the
      // road centre), then a lead-out.
      const bool left = unit(rng) < 0.5;
      const double sign = left ? 1.0 : -1.0;
      const double lead_in = 150.0 + 50.0 * unit(rng);
      const double R = spec.arc_radius;
      const Vec2 centre{lead_in, sign * R};
      for (int i = 0; i < spec.lane_count; ++i) {
        const double off = lane_offset(spec, i);
        const double r = R - sign * off;
        std::vector<Vec2> pts;
        append_straight(pts, {0.0, off}, {lead_in, off});
        const double arc_len = r * std::numbers::pi / 2.0;
        const int n = static_cast<int>(std::ceil(arc_len));
        for (int k = 1; k <= n; ++k) {
          const double phi = (std::numbers::pi / 2.0) * k / n;
          pts.push_back({centre.x + r * std::sin(phi), centre.y - sign * r * std::cos(phi)});
        }
        const Vec2 end = pts.back();
        const double lead_out = std::max(50.0, L - lead_in - arc_len);
        append_straight(pts, end, {end.x, end.y + sign * lead_out});
        net.lanes.emplace_back(std::move(pts));
      }
      net.focus_s = lead_in;
      break;
    }
    case RoadKind::TIntersection:
    case RoadKind::Crossroads: {
      for (int i = 0; i < spec.lane_count; ++i) {
        std::vector<Vec2> pts;
        append_straight(pts, {0.0, lane_offset(spec, i)}, {L, lane_offset(spec, i)});
        net.lanes.emplace_back(std::move(pts));
      }
      const double junction = 150.0 + 50.0 * unit(rng);
      const double far = 150.0;
      const bool cross = spec.kind == RoadKind::Crossroads;
      for (int i = 0; i < spec.lane_count; ++i) {
        const double x = junction + lane_offset(spec, i);
        std::vector<Vec2> pts;
        append_straight(pts, {x, -far}, {x, cross ? far : -half_road});
        net.lanes.emplace_back(std::move(pts));
      }
      net.focus_s = junction;
      break;
    }
  }
  net.traffic_lanes = static_cast<std::size_t>(spec.lane_count);
  return net;
}

MapLines gen_road(const RoadSpec& spec, std::uint64_t seed) { return gen_road_network(spec, seed).lanes; }

}  // namespace gpd::synth
