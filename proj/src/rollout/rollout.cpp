#include "gpd/rollout/rollout.hpp"

#include <algorithm>

#include "gpd/codec/lanes.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"

namespace gpd::rollout {

std::string to_string(TaskMode m) {
  switch (m) {
    case TaskMode::SceneGeneration: return "scene-generation";
    case TaskMode::TrafficSimulation: return "traffic-simulation";
    case TaskMode::ClosedLoop: return "closed-loop";
    case TaskMode::MotionPlanning: return "motion-planning";
    case TaskMode::Conditional: return "conditional";
  }
  return "?";
}

TaskMode parse_task_mode(const std::string& t) {
  if (t == "scene-generation" || t == "sg") return TaskMode::SceneGeneration;
  if (t == "traffic-simulation" || t == "ts") return TaskMode::TrafficSimulation;
  if (t == "closed-loop" || t == "cl") return TaskMode::ClosedLoop;
  if (t == "motion-planning" || t == "mp") return TaskMode::MotionPlanning;
  if (t == "conditional" || t == "cond") return TaskMode::Conditional;
  throw ConfigError("unknown task mode '" + t + "'");
}

bool substitutes(TaskMode mode, const world::SceneLayout& layout, std::size_t slot) {
  const bool map = slot < layout.n_map;
  const bool ego = slot == layout.n_map;
  switch (mode) {
    case TaskMode::SceneGeneration: return false;
    case TaskMode::TrafficSimulation: return map;
    case TaskMode::ClosedLoop: return map || ego;
    case TaskMode::MotionPlanning: return map || (!ego && slot > layout.n_map);
    case TaskMode::Conditional: return false;
  }
  return false;
}

std::vector<scene::Pose2D> chain_poses(const scene::Pose2D& start, const std::vector<scene::Pose2D>& deltas) {
  std::vector<scene::Pose2D> out{start};
  for (const auto& d : deltas) out.push_back(scene::compose(out.back(), d));
  return out;
}

namespace {

scene::AgentState with_pose(scene::AgentState st, const scene::Pose2D& pose, bool visible) {
  st.pose = pose;
  st.visible = visible;
  return st;
}

}  // namespace

RolloutResult run_rollout(const world::WorldModel<float>& model, const codec::CodecModel<float>& codec,
                          const scene::Scenario& gt, const RolloutConfig& cfg) {
  const auto& L = model.config().layout;
  const std::size_t n_slots = L.tokens_per_frame();
  const std::size_t c = cfg.context_frames;
  const std::size_t h = cfg.horizon_frames;
  const std::size_t window = cfg.window == 0 ? L.t_max : std::min(cfg.window, L.t_max);
  if (c == 0) throw ConfigError("rollout needs at least one context frame");
  if (gt.frames.size() < c) throw ConfigError("scenario has " + std::to_string(gt.frames.size()) + " frames, context needs " + std::to_string(c));
  if (cfg.mode == TaskMode::Conditional && !cfg.predicate) throw ConfigError("conditional rollout needs a predicate");

  auto use_gt = [&](std::size_t frame, std::size_t slot) {
    return cfg.mode == TaskMode::Conditional ? cfg.predicate(frame, slot) : substitutes(cfg.mode, L, slot);
  };
  bool needs_gt = false;
  for (std::size_t t = c; t < c + h && !needs_gt; ++t) {
    for (std::size_t k = 0; k < n_slots && !needs_gt; ++k) needs_gt = use_gt(t, k);
  }
  if (needs_gt && gt.frames.size() < c + h) {
    throw ConfigError("scenario has " + std::to_string(gt.frames.size()) + " frames, " + to_string(cfg.mode) +
                      " needs " + std::to_string(c + h));
  }

  const double half = codec.config().raster.region_half_extent;
  std::vector<world::FrameTokens> tokens;
  std::vector<scene::Pose2D> ego;
  {
    scene::Scenario ctx;
    ctx.dt = gt.dt;
    ctx.frames.assign(gt.frames.begin(), gt.frames.begin() + static_cast<long>(c));
    auto tk = world::tokenize_scenario(ctx, codec, L);
    tokens = std::move(tk.frames);
    ego = std::move(tk.ego_global);
  }
  const scene::SceneFrame& last_ctx = gt.frames[c - 1];

  RolloutResult res;
  res.mode = cfg.mode;
  res.scenario.dt = gt.dt;
  for (std::size_t t = c; t < c + h; ++t) {
    const std::size_t lo = tokens.size() > window ? tokens.size() - window : 0;
    world::FrameTokens next =
        world::predict_next(model, std::span<const world::FrameTokens>(tokens.data() + lo, tokens.size() - lo));
    std::vector<Source> prov(n_slots, Source::Predicted);
    const scene::SceneFrame* g = t < gt.frames.size() ? &gt.frames[t] : nullptr;

    // Ego first: every other substitution is expressed around it.
    scene::Pose2D pose;
    if (use_gt(t, L.n_map)) {
      pose = g->ego.pose;
      next.slots[0] = world::ego_slot(ego.back(), pose);
      prov[L.n_map] = Source::GroundTruth;
    } else {
      next.slots[0].visible = true;
      pose = scene::compose(ego.back(), next.slots[0].pose);
    }

    bool any_map_gt = false, all_map_gt = true;
    for (std::size_t k = 0; k < L.n_map; ++k) {
      const bool s = use_gt(t, k);
      any_map_gt = any_map_gt || s;
      all_map_gt = all_map_gt && s;
    }
    if (any_map_gt) {
      const auto gt_map = world::tokenize_map(g->map, pose, codec);
      for (std::size_t k = 0; k < L.n_map; ++k) {
        if (!use_gt(t, k)) continue;
        next.map[k] = gt_map[k];
        prov[k] = Source::GroundTruth;
      }
    }
    std::vector<agent::SlotState> gt_agents;
    for (std::size_t a = 1; a < L.n_agent; ++a) {
      if (!use_gt(t, L.n_map + a)) continue;
      if (gt_agents.empty()) gt_agents = world::agent_slots(*g, pose, L, half);
      next.slots[a] = gt_agents[a - 1];
      prov[L.n_map + a] = Source::GroundTruth;
    }

    // Global frame for the output scenario; ground-truth slots pass through untouched.
    scene::SceneFrame out;
    out.t_index = g ? g->t_index : last_ctx.t_index + static_cast<std::int64_t>(t - c + 1);
    out.ego = prov[L.n_map] == Source::GroundTruth ? g->ego : with_pose(last_ctx.ego, pose, true);
    for (std::size_t a = 0; a < last_ctx.agents.size(); ++a) {
      if (prov[L.n_map + 1 + a] == Source::GroundTruth) {
        out.agents.push_back(g->agents[a]);
      } else {
        const auto& s = next.slots[1 + a];
        out.agents.push_back(with_pose(last_ctx.agents[a], scene::compose(pose, s.pose), s.visible));
      }
    }
    if (all_map_gt) {
      out.map = g->map;
    } else {
      const auto lanes = codec.decode_tokens(next.map);
      out.map = scene::transform_map(codec::visible_lines(lanes, half), pose, false);
    }

    tokens.push_back(next);
    ego.push_back(pose);
    res.tokens.push_back(std::move(next));
    res.provenance.push_back(std::move(prov));
    res.scenario.frames.push_back(std::move(out));
  }
  return res;
}

}  // namespace gpd::rollout
