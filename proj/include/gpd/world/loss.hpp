#pragma once

#include <array>

#include "gpd/world/model.hpp"

namespace gpd::world {

struct WorldLossWeights {
  double map = 1.0;
  double agent = 1.0;
  double visibility = 1.0;
};

template <typename T>
struct WorldLoss {
  nn::Var<T> total;
  double map_ce = 0.0;
  double agent_l1 = 0.0;      // smooth-L1 (delta 1) mean over x, y, heading of target-visible slots
  double position_l1 = 0.0;   // the same over x, y only
  double visibility = 0.0;
  std::size_t map_correct = 0;
  std::size_t map_count = 0;
  std::size_t agent_count = 0;
};

/// Per-slot regression target in head units: offsets of x, y from the
/// residual base in meters and the wrapped heading change from it in degrees.
std::array<double, 3> agent_target(const agent::SlotState& input, const agent::SlotState& target,
                                   const agent::AgentTokConfig& cfg);

/// Loss of predictions for frames [0, targets.size()) of `window`, where
/// targets[t] is the token record of the frame following window[t].
template <typename T>
WorldLoss<T> world_loss(const WorldModel<T>& model, const typename WorldModel<T>::Output& out,
                        std::span<const FrameTokens> window, std::span<const FrameTokens> targets,
                        const WorldLossWeights& w = {});

}  // namespace gpd::world
