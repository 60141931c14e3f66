#include "gpd/agent/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpd/scene/error.hpp"

namespace gpd::agent {

std::size_t AgentTokConfig::pos_vec_dim() const {
  return (2 * position.levels.size() + heading.levels.size()) * level_dim;
}

void validate(const AgentTokConfig& cfg) {
  cfg.position.validate();
  cfg.heading.validate();
  if (cfg.level_dim == 0 || cfg.level_dim % 2 != 0) throw ConfigError("agent level_dim must be even and positive");
  if (cfg.model_dim == 0) throw ConfigError("agent model_dim must be positive");
  if (!(cfg.half_extent > 0.0)) throw ConfigError("agent half_extent must be positive");
}

std::vector<double> sinusoidal_embed(std::int64_t q, std::size_t dim) {
  return nn::sinusoidal(static_cast<double>(q), dim);
}

QuantizedState quantize_state(const scene::Pose2D& pose, const AgentTokConfig& cfg) {
  const double h = cfg.half_extent;
  QuantizedState q;
  q.x = quantize_scalar(std::clamp(pose.x, -h, h), cfg.position);
  q.y = quantize_scalar(std::clamp(pose.y, -h, h), cfg.position);
  q.heading = quantize_scalar(heading_degrees(pose.heading), cfg.heading);
  return q;
}

scene::Pose2D dequantize_state(const QuantizedState& q, const AgentTokConfig& cfg) {
  return {dequantize(q.x, cfg.position), dequantize(q.y, cfg.position),
          scene::normalize_angle(dequantize(q.heading, cfg.heading) * std::numbers::pi / 180.0)};
}

std::vector<double> pos_vec(const QuantizedState& q, const AgentTokConfig& cfg) {
  std::vector<double> out;
  out.reserve(cfg.pos_vec_dim());
  for (const auto* levels : {&q.x, &q.y, &q.heading}) {
    for (auto v : *levels) {
      const auto e = sinusoidal_embed(v, cfg.level_dim);
      out.insert(out.end(), e.begin(), e.end());
    }
  }
  return out;
}

template <typename T>
AgentEmbedder<T>::AgentEmbedder(nn::ParameterSet<T>& ps, const std::string& name, const AgentTokConfig& cfg, nn::Rng& rng)
    : cfg_(cfg) {
  validate(cfg_);
  fc1_ = nn::Linear<T>(ps, name + ".fc1", cfg_.pos_vec_dim(), cfg_.model_dim, rng);
  fc2_ = nn::Linear<T>(ps, name + ".fc2", cfg_.model_dim, cfg_.model_dim, rng);
  invisible_ = &ps.add(name + ".invisible", {1, cfg_.model_dim});
  nn::init_uniform(*invisible_, 0.02, rng);
}

template <typename T>
nn::Var<T> AgentEmbedder<T>::operator()(nn::Tape<T>& tape, const std::vector<SlotState>& states) const {
  const std::size_t n = states.size();
  const std::size_t pd = cfg_.pos_vec_dim();
  std::vector<std::size_t> visible_rows;
  std::vector<T> feats;
  for (std::size_t i = 0; i < n; ++i) {
    if (!states[i].visible) continue;
    visible_rows.push_back(i);
    for (double v : pos_vec(quantize_state(states[i].pose, cfg_), cfg_)) feats.push_back(static_cast<T>(v));
  }
  const nn::Var<T> inv = tape.param(*invisible_);
  if (visible_rows.empty()) {
    const std::vector<std::size_t> idx(n, 0);
    return nn::gather_rows(inv, std::span<const std::size_t>(idx));
  }
  const auto x = tape.constant(nn::Tensor<T>({visible_rows.size(), pd}, std::move(feats)));
  const auto emb = fc2_(nn::gelu(fc1_(x)));
  // Rows [0, m) are visible embeddings, row m is the shared invisible token.
  const std::vector<nn::Var<T>> parts{emb, inv};
  const auto table = nn::concat_rows(std::span<const nn::Var<T>>(parts));
  std::vector<std::size_t> idx(n, visible_rows.size());
  for (std::size_t k = 0; k < visible_rows.size(); ++k) idx[visible_rows[k]] = k;
  return nn::gather_rows(table, std::span<const std::size_t>(idx));
}

template class AgentEmbedder<float>;
template class AgentEmbedder<double>;

}  // namespace gpd::agent
