#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpd/scene/types.hpp"
#include "gpd/synth/road.hpp"

namespace gpd::synth {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IdmParams {
  double desired_speed = 10.0;  // m/s
  double time_headway = 1.5;    // s
  double min_gap = 2.0;         // m
  double max_accel = 1.5;       // m/s^2
  double comfort_decel = 2.0;   // m/s^2
};

/// Initial condition for one vehicle on a traffic lane. Index 0 is the ego.
struct Placement {
  std::size_t lane = 0;
  double s = 0.0;
  double speed = 0.0;
  double desired_speed = 0.0;
};

struct GenConfig {
  RoadSpec road;
  int n_agents = 4;
  int horizon_frames = 100;
  std::uint64_t seed = 0;
  IdmParams idm;
  double dt = 0.1;
  double half_extent = 32.0;
  double agent_length = 4.5;
  double agent_width = 2.0;
  /// Explicit initial conditions (ego first); replaces random placement.
  std::optional<std::vector<Placement>> placements;
};

void validate(const GenConfig& cfg);

/// IDM acceleration. `gap` is bumper-to-bumper distance to the leader and
/// `closing_speed` is v - v_leader; pass gap = +inf for a free road.
double idm_acceleration(const IdmParams& p, double desired_speed, double speed, double gap, double closing_speed);

/// Per-vehicle longitudinal state along its lane.
struct LaneVehicle {
  std::size_t lane = 0;
  double s = 0.0;
  double speed = 0.0;
  double desired_speed = 0.0;
};

/// One explicit-Euler step: s += v dt, v += a dt (a from the pre-step state), v clamped to [0, v0].
void idm_step(std::vector<LaneVehicle>& vehicles, const IdmParams& p, double length, double dt);

scene::Scenario gen_scenario(const GenConfig& cfg);

}  // namespace gpd::synth
