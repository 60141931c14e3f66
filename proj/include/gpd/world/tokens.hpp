#pragma once

#include <optional>
#include <vector>

#include "gpd/agent/tokenizer.hpp"
#include "gpd/codec/model.hpp"

namespace gpd::world {

/// Token slot layout: map slots [0, n_map), ego at n_map, agents after it.
struct SceneLayout {
  std::size_t n_map = 16;
  std::size_t n_agent = 9;
  std::size_t t_max = 50;

  std::size_t tokens_per_frame() const { return n_map + n_agent; }
  friend bool operator==(const SceneLayout&, const SceneLayout&) = default;
};

/// Everything the world model consumes for one frame.
///   map[k]     code index of map cell k
///   slots[0]   ego: pose change from the previous frame, in the previous
///              ego frame (invisible when there is no previous frame)
///   slots[1+a] agent a: pose in this frame's ego frame
/// Because of this convention the prediction target of frame t is exactly
/// the token record of frame t+1.
struct FrameTokens {
  std::vector<std::size_t> map;
  std::vector<agent::SlotState> slots;
  friend bool operator==(const FrameTokens&, const FrameTokens&) = default;
};

struct TokenizedScenario {
  std::vector<FrameTokens> frames;
  std::vector<scene::Pose2D> ego_global;
};

/// Map tokens of a global map seen from `ego_pose`.
std::vector<std::size_t> tokenize_map(const scene::MapLines& global_map, const scene::Pose2D& ego_pose,
                                      const codec::CodecModel<float>& codec);

/// Agent slots of `frame` seen from `ego_pose`. An agent is visible when its
/// scenario flag is set and it lies inside the square region around the ego.
std::vector<agent::SlotState> agent_slots(const scene::SceneFrame& frame, const scene::Pose2D& ego_pose,
                                          const SceneLayout& layout, double half_extent);

/// Ego slot for the step prev -> cur.
agent::SlotState ego_slot(const std::optional<scene::Pose2D>& prev, const scene::Pose2D& cur);

/// Tokens of every frame using the scenario's own ego poses.
/// Throws ConfigError when the scenario has more agents than slots.
TokenizedScenario tokenize_scenario(const scene::Scenario& s, const codec::CodecModel<float>& codec,
                                    const SceneLayout& layout);

}  // namespace gpd::world
