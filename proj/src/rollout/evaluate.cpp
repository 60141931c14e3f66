#include "gpd/rollout/evaluate.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "gpd/metrics/map.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"
#include "gpd/scene/scenario_io.hpp"

namespace gpd::rollout {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

scene::MapLines ego_view(const scene::SceneFrame& f, double half) {
  return scene::clip_map_to_region(scene::transform_map(f.map, f.ego.pose, true), half);
}

}  // namespace

EvalRow evaluate_prediction(const scene::Scenario& pred, const scene::Scenario& gt, std::size_t horizon_frames,
                            double half_extent) {
  if (horizon_frames == 0 || pred.frames.size() < horizon_frames) {
    throw ConfigError("prediction has " + std::to_string(pred.frames.size()) + " frames, horizon needs " +
                      std::to_string(horizon_frames));
  }
  std::map<std::int64_t, const scene::SceneFrame*> by_t;
  for (const auto& f : gt.frames) by_t[f.t_index] = &f;
  std::vector<const scene::SceneFrame*> g;
  for (std::size_t k = 0; k < horizon_frames; ++k) {
    const auto it = by_t.find(pred.frames[k].t_index);
    if (it == by_t.end()) throw ConfigError("ground truth lacks frame t=" + std::to_string(pred.frames[k].t_index));
    g.push_back(it->second);
  }

  EvalRow row;
  row.frames = horizon_frames;
  row.horizon_s = std::round(static_cast<double>(horizon_frames) * pred.dt * 1e6) / 1e6;

  metrics::TrajPair ego;
  for (std::size_t k = 0; k < horizon_frames; ++k) {
    ego.pred.push_back(pred.frames[k].ego.pose.position());
    ego.gt.push_back(g[k]->ego.pose.position());
    ego.visible.push_back(1);
  }
  row.ego_ade = metrics::ade(ego);
  row.ego_fde = metrics::fde(ego);

  double ade_sum = 0.0, fde_sum = 0.0;
  for (std::size_t a = 0; a < g[0]->agents.size(); ++a) {
    const std::int64_t id = g[0]->agents[a].id;
    metrics::TrajPair tp;
    bool any = false;
    for (std::size_t k = 0; k < horizon_frames; ++k) {
      const scene::AgentState* p = nullptr;
      for (const auto& s : pred.frames[k].agents) {
        if (s.id == id) p = &s;
      }
      const scene::AgentState* q = nullptr;
      for (const auto& s : g[k]->agents) {
        if (s.id == id) q = &s;
      }
      const bool vis = p != nullptr && q != nullptr && q->visible;
      tp.pred.push_back(p ? p->pose.position() : scene::Vec2{});
      tp.gt.push_back(q ? q->pose.position() : scene::Vec2{});
      tp.visible.push_back(vis ? 1 : 0);
      any = any || vis;
    }
    if (!any) continue;
    ade_sum += metrics::ade(tp);
    fde_sum += metrics::fde(tp);
    ++row.agents_scored;
  }
  row.agent_ade = row.agents_scored ? ade_sum / static_cast<double>(row.agents_scored) : kNaN;
  row.agent_fde = row.agents_scored ? fde_sum / static_cast<double>(row.agents_scored) : kNaN;

  scene::Scenario head;
  head.frames.assign(pred.frames.begin(), pred.frames.begin() + static_cast<long>(horizon_frames));
  row.collision_rate = metrics::collision_rate(head);

  // Map metrics at every whole second inside the horizon (the last frame if shorter).
  const auto per_second = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / pred.dt)));
  std::vector<std::size_t> marks;
  for (std::size_t k = per_second - 1; k < horizon_frames; k += per_second) marks.push_back(k);
  if (marks.empty()) marks.push_back(horizon_frames - 1);
  double f1 = 0.0, lat = 0.0, ch = 0.0;
  std::size_t n_f1 = 0, n_lat = 0;
  for (auto k : marks) {
    const auto gt_lines = ego_view(*g[k], half_extent);
    if (gt_lines.empty()) continue;
    const auto pred_pts = metrics::sample_points(ego_view(pred.frames[k], half_extent));
    const auto gt_pts = metrics::sample_points(gt_lines);
    f1 += metrics::map_f1(pred_pts, gt_pts).f1;
    ++n_f1;
    if (pred_pts.empty()) continue;
    lat += metrics::lateral_l2(pred_pts, gt_lines);
    ch += metrics::chamfer(pred_pts, gt_pts);
    ++n_lat;
  }
  row.map_frames = n_f1;
  row.map_f1 = n_f1 ? f1 / static_cast<double>(n_f1) : kNaN;
  row.map_lateral_l2 = n_lat ? lat / static_cast<double>(n_lat) : kNaN;
  row.map_chamfer = n_lat ? ch / static_cast<double>(n_lat) : kNaN;
  return row;
}

EvalRow average_rows(const std::vector<EvalRow>& rows) {
  EvalRow out;
  if (rows.empty()) return out;
  out.scenario = "mean";
  out.mode = rows.front().mode;
  out.horizon_s = rows.front().horizon_s;
  out.frames = rows.front().frames;
  auto avg = [&rows](double EvalRow::*field) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (std::isnan(r.*field)) continue;
      s += r.*field;
      ++n;
    }
    return n ? s / static_cast<double>(n) : kNaN;
  };
  out.ego_ade = avg(&EvalRow::ego_ade);
  out.ego_fde = avg(&EvalRow::ego_fde);
  out.agent_ade = avg(&EvalRow::agent_ade);
  out.agent_fde = avg(&EvalRow::agent_fde);
  out.collision_rate = avg(&EvalRow::collision_rate);
  out.map_f1 = avg(&EvalRow::map_f1);
  out.map_lateral_l2 = avg(&EvalRow::map_lateral_l2);
  out.map_chamfer = avg(&EvalRow::map_chamfer);
  for (const auto& r : rows) {
    out.agents_scored += r.agents_scored;
    out.map_frames += r.map_frames;
  }
  return out;
}

std::string format_row(const EvalRow& r) {
  std::ostringstream o;
  auto num = [](double v) { return std::isnan(v) ? std::string("nan") : scene::format_double(v); };
  o << "scenario=" << r.scenario << " mode=" << r.mode << " horizon_s=" << num(r.horizon_s) << " frames=" << r.frames
    << " ego_ade=" << num(r.ego_ade) << " ego_fde=" << num(r.ego_fde) << " agent_ade=" << num(r.agent_ade)
    << " agent_fde=" << num(r.agent_fde) << " agents_scored=" << r.agents_scored
    << " collision_rate=" << num(r.collision_rate) << " map_f1=" << num(r.map_f1)
    << " map_lateral_l2=" << num(r.map_lateral_l2) << " map_chamfer=" << num(r.map_chamfer)
    << " map_frames=" << r.map_frames;
  return o.str();
}

}  // namespace gpd::rollout
