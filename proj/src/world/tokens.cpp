#include "gpd/world/tokens.hpp"

#include <cmath>

#include "gpd/raster/raster.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"

namespace gpd::world {

std::vector<std::size_t> tokenize_map(const scene::MapLines& global_map, const scene::Pose2D& ego_pose,
                                      const codec::CodecModel<float>& codec) {
  const auto& rc = codec.config().raster;
  const auto local = scene::clip_map_to_region(scene::transform_map(global_map, ego_pose, true), rc.region_half_extent);
  return codec.tokenize(raster::rasterize(local, rc));
}

std::vector<agent::SlotState> agent_slots(const scene::SceneFrame& frame, const scene::Pose2D& ego_pose,
                                          const SceneLayout& layout, double half_extent) {
  if (frame.agents.size() + 1 > layout.n_agent) {
    throw ConfigError("frame has " + std::to_string(frame.agents.size()) + " agents but the layout holds " +
                      std::to_string(layout.n_agent - 1));
  }
  std::vector<agent::SlotState> out(layout.n_agent - 1);
  for (std::size_t a = 0; a < frame.agents.size(); ++a) {
    const auto& st = frame.agents[a];
    const auto local = scene::relative(ego_pose, st.pose);
    out[a].pose = local;
    out[a].visible = st.visible && std::abs(local.x) <= half_extent && std::abs(local.y) <= half_extent;
  }
  return out;
}

agent::SlotState ego_slot(const std::optional<scene::Pose2D>& prev, const scene::Pose2D& cur) {
  if (!prev) return {};
  return {true, scene::relative(*prev, cur)};
}

TokenizedScenario tokenize_scenario(const scene::Scenario& s, const codec::CodecModel<float>& codec,
                                    const SceneLayout& layout) {
  const double h = codec.config().raster.region_half_extent;
  TokenizedScenario out;
  std::optional<scene::Pose2D> prev;
  for (const auto& f : s.frames) {
    FrameTokens ft;
    ft.map = tokenize_map(f.map, f.ego.pose, codec);
    if (ft.map.size() != layout.n_map) throw ConfigError("codec grid does not match the layout's map slots");
    ft.slots.push_back(ego_slot(prev, f.ego.pose));
    const auto agents = agent_slots(f, f.ego.pose, layout, h);
    ft.slots.insert(ft.slots.end(), agents.begin(), agents.end());
    out.frames.push_back(std::move(ft));
    out.ego_global.push_back(f.ego.pose);
    prev = f.ego.pose;
  }
  return out;
}

}  // namespace gpd::world
