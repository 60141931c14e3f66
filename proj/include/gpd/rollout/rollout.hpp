#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gpd/world/model.hpp"

namespace gpd::rollout {

enum class TaskMode { SceneGeneration, TrafficSimulation, ClosedLoop, MotionPlanning, Conditional };

std::string to_string(TaskMode m);
/// Accepts the full names and the short forms sg, ts, cl, mp, cond.
TaskMode parse_task_mode(const std::string& text);

/// True when slot `slot` of scenario frame `frame` is replaced by ground truth.
using SubstitutionPredicate = std::function<bool(std::size_t frame, std::size_t slot)>;

struct RolloutConfig {
  std::size_t context_frames = 20;
  std::size_t horizon_frames = 30;
  TaskMode mode = TaskMode::SceneGeneration;
  SubstitutionPredicate predicate;  // Conditional only
  std::size_t window = 0;           // model context in frames; 0 = t_max
};

/// Per-slot provenance flag.
enum class Source : std::uint8_t { Predicted = 0, GroundTruth = 1 };

struct RolloutResult {
  scene::Scenario scenario;                      // horizon frames, global coordinates
  std::vector<world::FrameTokens> tokens;        // token record of each horizon frame
  std::vector<std::vector<Source>> provenance;   // [frame][slot]
  TaskMode mode = TaskMode::SceneGeneration;
};

/// Substitution rule of a mode for one slot.
bool substitutes(TaskMode mode, const world::SceneLayout& layout, std::size_t slot);

/// Autoregressive greedy rollout. Context frames come from `gt`; each
/// predicted frame then has its mode's slots replaced by ground truth,
/// re-tokenized around the current (possibly predicted) ego pose.
/// Throws ConfigError when `gt` is too short for the requested mode.
RolloutResult run_rollout(const world::WorldModel<float>& model, const codec::CodecModel<float>& codec,
                          const scene::Scenario& gt, const RolloutConfig& cfg);

/// Chains per-frame ego deltas onto a start pose: out[0] = start.
std::vector<scene::Pose2D> chain_poses(const scene::Pose2D& start, const std::vector<scene::Pose2D>& deltas);

}  // namespace gpd::rollout
