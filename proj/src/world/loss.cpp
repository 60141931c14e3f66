#include "gpd/world/loss.hpp"

#include <cmath>
#include <numbers>

#include "gpd/scene/error.hpp"

namespace gpd::world {

std::array<double, 3> agent_target(const agent::SlotState& input, const agent::SlotState& target,
                                   const agent::AgentTokConfig& cfg) {
  const auto base = residual_base(input, cfg);
  const double dh = scene::normalize_angle(target.pose.heading - base.heading);
  return {target.pose.x - base.x, target.pose.y - base.y, dh * 180.0 / std::numbers::pi};
}

template <typename T>
WorldLoss<T> world_loss(const WorldModel<T>& model, const typename WorldModel<T>::Output& out,
                        std::span<const FrameTokens> window, std::span<const FrameTokens> targets,
                        const WorldLossWeights& w) {
  const auto& L = model.config().layout;
  if (targets.empty() || targets.size() > window.size()) throw ConfigError("world_loss needs 1..W target frames");
  auto& tape = out.map_logits.tape();
  WorldLoss<T> res;

  // Map cross-entropy over every map slot of frames with a target.
  std::vector<std::size_t> map_rows, map_labels;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t k = 0; k < L.n_map; ++k) {
      map_rows.push_back(t * L.n_map + k);
      map_labels.push_back(targets[t].map[k]);
    }
  }
  const auto logits = nn::gather_rows(out.map_logits, std::span<const std::size_t>(map_rows));
  const auto ce = nn::cross_entropy(logits, std::span<const std::size_t>(map_labels));
  res.map_ce = static_cast<double>(ce.value()[0]);
  res.map_count = map_rows.size();
  const auto& lv = logits.value();
  for (std::size_t r = 0; r < map_rows.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < lv.cols(); ++c) {
      if (lv(r, c) > lv(r, best)) best = c;
    }
    res.map_correct += best == map_labels[r];
  }

  // Agent regression on target-visible slots, visibility on all slots.
  std::vector<std::size_t> agent_rows, reg_rows;
  std::vector<T> reg_target, vis_target;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t a = 0; a < L.n_agent; ++a) {
      const std::size_t r = t * L.n_agent + a;
      agent_rows.push_back(r);
      const auto& tgt = targets[t].slots[a];
      vis_target.push_back(tgt.visible ? T(1) : T(0));
      if (!tgt.visible) continue;
      reg_rows.push_back(r);
      for (double v : agent_target(residual_input(window[t], a), tgt, model.config().agent)) reg_target.push_back(static_cast<T>(v));
    }
  }
  const auto rows = nn::gather_rows(out.agent_out, std::span<const std::size_t>(agent_rows));
  const auto vis = nn::bce_with_logits(nn::slice_cols(rows, kOutVis, 1), std::span<const T>(vis_target));
  res.visibility = static_cast<double>(vis.value()[0]);
  auto total = nn::add(nn::scale(ce, static_cast<T>(w.map)), nn::scale(vis, static_cast<T>(w.visibility)));
  res.agent_count = reg_rows.size();
  if (!reg_rows.empty()) {
    const auto pred = nn::slice_cols(nn::gather_rows(out.agent_out, std::span<const std::size_t>(reg_rows)), kOutX, 3);
    const auto tgt = tape.constant(nn::Tensor<T>({reg_rows.size(), 3}, std::move(reg_target)));
    const auto per = nn::smooth_l1(nn::sub(pred, tgt), T(1));
    const auto l1 = nn::mean(per);
    res.agent_l1 = static_cast<double>(l1.value()[0]);
    double pos = 0.0;
    for (std::size_t r = 0; r < reg_rows.size(); ++r) pos += static_cast<double>(per.value()(r, 0) + per.value()(r, 1));
    res.position_l1 = pos / static_cast<double>(2 * reg_rows.size());
    total = nn::add(total, nn::scale(l1, static_cast<T>(w.agent)));
  }
  res.total = total;
  return res;
}

template WorldLoss<float> world_loss(const WorldModel<float>&, const WorldModel<float>::Output&, std::span<const FrameTokens>,
                                     std::span<const FrameTokens>, const WorldLossWeights&);
template WorldLoss<double> world_loss(const WorldModel<double>&, const WorldModel<double>::Output&,
                                      std::span<const FrameTokens>, std::span<const FrameTokens>, const WorldLossWeights&);

}  // namespace gpd::world
