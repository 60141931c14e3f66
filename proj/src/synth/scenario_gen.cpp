#include "gpd/synth/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"

namespace gpd::synth {

using scene::AgentState;
using scene::Pose2D;
using scene::Scenario;
using scene::SceneFrame;

void validate(const GenConfig& cfg) {
  validate(cfg.road);
  if (cfg.n_agents < 0) throw ConfigError("n_agents must be >= 0");
  if (cfg.horizon_frames < 21) throw ConfigError("horizon_frames must be >= 21");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.half_extent > 0.0)) throw ConfigError("half_extent must be positive");
  const auto& p = cfg.idm;
  if (!(p.desired_speed > 0.0) || !(p.time_headway > 0.0) || !(p.min_gap > 0.0) || !(p.max_accel > 0.0) ||
      !(p.comfort_decel > 0.0)) {
    throw ConfigError("IDM parameters must be positive");
  }
  if (!(cfg.road.lane_width > cfg.agent_width)) throw ConfigError("lane_width must exceed agent width");
  if (cfg.placements && cfg.placements->size() != static_cast<std::size_t>(cfg.n_agents) + 1) {
    throw ConfigError("placements must list the ego plus every agent");
  }
}

double idm_acceleration(const IdmParams& p, double desired_speed, double speed, double gap, double closing_speed) {
  const double free = 1.0 - std::pow(speed / desired_speed, 4);
  if (!std::isfinite(gap)) return p.max_accel * free;
  const double s_star =
      p.min_gap + std::max(0.0, speed * p.time_headway + speed * closing_speed / (2.0 * std::sqrt(p.max_accel * p.comfort_decel)));
  const double g = std::max(gap, 1e-3);
  return p.max_accel * (free - (s_star / g) * (s_star / g));
}

void idm_step(std::vector<LaneVehicle>& vehicles, const IdmParams& p, double length, double dt) {
  std::vector<double> accel(vehicles.size());
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const LaneVehicle& me = vehicles[i];
    double gap = std::numeric_limits<double>::infinity();
    double closing = 0.0;
    for (std::size_t j = 0; j < vehicles.size(); ++j) {
      const LaneVehicle& other = vehicles[j];
      if (j == i || other.lane != me.lane || other.s <= me.s) continue;
      const double g = other.s - me.s - length;
      if (g < gap) {
        gap = g;
        closing = me.speed - other.speed;
      }
    }
    accel[i] = idm_acceleration(p, me.desired_speed, me.speed, gap, closing);
  }
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    LaneVehicle& v = vehicles[i];
    v.s += v.speed * dt;
    v.speed = std::clamp(v.speed + accel[i] * dt, 0.0, v.desired_speed);
  }
}

namespace {

std::vector<LaneVehicle> random_placement(const GenConfig& cfg, const RoadNetwork& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> lane_dist(0, net.traffic_lanes - 1);
  const double v0 = cfg.idm.desired_speed;
  std::vector<LaneVehicle> out;

  LaneVehicle ego;
  ego.lane = lane_dist(rng);
  ego.s = std::max(80.0, net.focus_s - 60.0 * unit(rng));
  ego.desired_speed = v0;
  ego.speed = v0;
  out.push_back(ego);

  const double spacing = cfg.agent_length + cfg.idm.min_gap + 0.5 * v0 * cfg.idm.time_headway;
  for (int a = 0; a < cfg.n_agents; ++a) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      LaneVehicle v;
      v.lane = lane_dist(rng);
      v.s = ego.s - 35.0 + 80.0 * unit(rng);
      v.desired_speed = v0 * (0.7 + 0.3 * unit(rng));
      v.speed = v.desired_speed * (0.85 + 0.15 * unit(rng));
      const bool clash = std::any_of(out.begin(), out.end(), [&](const LaneVehicle& o) {
        return o.lane == v.lane && std::abs(o.s - v.s) < spacing;
      });
      if (!clash && v.s > 0.0) {
        out.push_back(v);
        placed = true;
      }
    }
    if (!placed) throw GenerationError("cannot place agent " + std::to_string(a + 1) + " without overlap");
  }
  return out;
}

bool any_collision(const Scenario& s) {
  for (const auto& fr : s.frames) {
    std::vector<const AgentState*> all{&fr.ego};
    for (const auto& a : fr.agents) all.push_back(&a);
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        if (scene::boxes_overlap(all[i]->pose, all[i]->length, all[i]->width, all[j]->pose, all[j]->length,
                                 all[j]->width)) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

Scenario gen_scenario(const GenConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RoadSpec road = cfg.road;
  const double travel = cfg.idm.desired_speed * cfg.dt * cfg.horizon_frames;
  road.length = std::max(road.length, 400.0 + travel);
  const RoadNetwork net = gen_road_network(road, rng());

  // Arbitrary rigid placement of the whole road in the world frame.
  const Pose2D world{-500.0 + 1000.0 * unit(rng), -500.0 + 1000.0 * unit(rng),
                     scene::normalize_angle(2.0 * std::numbers::pi * unit(rng))};
  const scene::MapLines map = scene::transform_map(net.lanes, world, false);

  constexpr int kMaxRetries = 20;
  for (int retry = 0; retry < kMaxRetries; ++retry) {
    std::vector<LaneVehicle> veh;
    if (cfg.placements) {
      for (const auto& p : *cfg.placements) {
        if (p.lane >= net.traffic_lanes) throw ConfigError("placement lane out of range");
        veh.push_back({p.lane, p.s, p.speed, p.desired_speed > 0.0 ? p.desired_speed : cfg.idm.desired_speed});
      }
    } else {
      veh = random_placement(cfg, net, rng);
    }

    Scenario s;
    s.dt = cfg.dt;
    for (int t = 0; t < cfg.horizon_frames; ++t) {
      SceneFrame fr;
      fr.t_index = t;
      for (std::size_t i = 0; i < veh.size(); ++i) {
        const auto& lane = net.lanes[veh[i].lane];
        AgentState st;
        st.id = static_cast<std::int64_t>(i);
        st.pose = scene::compose(world, scene::point_at_arclength(lane, veh[i].s));
        st.length = cfg.agent_length;
        st.width = cfg.agent_width;
        if (i == 0) {
          fr.ego = st;
        } else {
          fr.agents.push_back(st);
        }
      }
      for (auto& a : fr.agents) {
        const scene::Vec2 local = scene::apply_inverse(fr.ego.pose, a.pose.position());
        a.visible = std::abs(local.x) <= cfg.half_extent && std::abs(local.y) <= cfg.half_extent;
      }
      fr.map = map;
      s.frames.push_back(std::move(fr));
      idm_step(veh, cfg.idm, cfg.agent_length, cfg.dt);
    }
    if (!any_collision(s)) return s;
    if (cfg.placements) break;
  }
  throw GenerationError("could not generate a collision-free scenario");
}

}  // namespace gpd::synth
