#include "gpd/world/model.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "gpd/scene/error.hpp"
#include "gpd/scene/scenario_io.hpp"
#include "gpd/world/mask.hpp"

namespace gpd::world {

void validate(const WorldConfig& cfg) {
  if (cfg.layout.n_map == 0 || cfg.layout.n_agent < 1 || cfg.layout.t_max == 0) {
    throw ConfigError("layout needs n_map >= 1, n_agent >= 1, t_max >= 1");
  }
  if (cfg.heads == 0 || cfg.dim % cfg.heads != 0) throw ConfigError("world dim must be divisible by heads");
  if (cfg.codebook_size < 2 || cfg.code_dim == 0) throw ConfigError("world model needs a codebook");
  agent::AgentTokConfig a = cfg.agent;
  a.model_dim = cfg.dim;
  agent::validate(a);
}

std::map<std::string, std::string> to_header(const WorldConfig& cfg) {
  return {
      {"world.n_map", std::to_string(cfg.layout.n_map)},
      {"world.n_agent", std::to_string(cfg.layout.n_agent)},
      {"world.t_max", std::to_string(cfg.layout.t_max)},
      {"world.dim", std::to_string(cfg.dim)},
      {"world.layers", std::to_string(cfg.layers)},
      {"world.heads", std::to_string(cfg.heads)},
      {"world.hidden", std::to_string(cfg.hidden)},
      {"world.codebook_size", std::to_string(cfg.codebook_size)},
      {"world.code_dim", std::to_string(cfg.code_dim)},
      {"agent.position_levels", cfg.agent.position.to_string()},
      {"agent.heading_levels", cfg.agent.heading.to_string()},
      {"agent.level_dim", std::to_string(cfg.agent.level_dim)},
      {"agent.half_extent", scene::format_double(cfg.agent.half_extent)},
  };
}

WorldConfig world_config_from_header(const std::map<std::string, std::string>& h) {
  auto get = [&h](const std::string& k) {
    const auto it = h.find(k);
    if (it == h.end()) throw ConfigError("world header lacks '" + k + "'");
    return it->second;
  };
  WorldConfig c;
  c.layout.n_map = std::stoul(get("world.n_map"));
  c.layout.n_agent = std::stoul(get("world.n_agent"));
  c.layout.t_max = std::stoul(get("world.t_max"));
  c.dim = std::stoul(get("world.dim"));
  c.layers = std::stoul(get("world.layers"));
  c.heads = std::stoul(get("world.heads"));
  c.hidden = std::stoul(get("world.hidden"));
  c.codebook_size = std::stoul(get("world.codebook_size"));
  c.code_dim = std::stoul(get("world.code_dim"));
  c.agent.position = agent::QuantScheme::parse(get("agent.position_levels"));
  c.agent.heading = agent::QuantScheme::parse(get("agent.heading_levels"));
  c.agent.level_dim = std::stoul(get("agent.level_dim"));
  c.agent.half_extent = scene::parse_double(get("agent.half_extent"));
  c.agent.model_dim = c.dim;
  validate(c);
  return c;
}

template <typename T>
WorldModel<T>::WorldModel(const WorldConfig& cfg, nn::Tensor<T> codebook, std::uint64_t seed)
    : cfg_(cfg), codebook_(std::move(codebook)) {
  cfg_.agent.model_dim = cfg_.dim;
  validate(cfg_);
  if (codebook_.shape() != nn::Shape{cfg_.codebook_size, cfg_.code_dim}) {
    throw nn::ShapeError("world codebook", codebook_.shape(), {cfg_.codebook_size, cfg_.code_dim});
  }
  nn::Rng rng(seed);
  map_in_ = nn::Linear<T>(params_, "map_in", cfg_.code_dim, cfg_.dim, rng);
  agent_in_ = agent::AgentEmbedder<T>(params_, "agent_in", cfg_.agent, rng);
  spatial_ = &params_.add("spatial", {cfg_.layout.tokens_per_frame(), cfg_.dim});
  temporal_ = &params_.add("temporal", {cfg_.layout.t_max, cfg_.dim});
  nn::init_uniform(*spatial_, 0.02, rng);
  nn::init_uniform(*temporal_, 0.02, rng);
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    blocks_.emplace_back(params_, "block" + std::to_string(l), cfg_.dim, cfg_.heads, cfg_.hidden, rng);
  }
  final_ln_ = nn::LayerNorm<T>(params_, "final_ln", cfg_.dim);
  map_head_ = nn::Linear<T>(params_, "map_head", cfg_.dim, cfg_.codebook_size, rng);
  agent_head_ = nn::Linear<T>(params_, "agent_head", cfg_.dim, kAgentOutCols, rng);
}

template <typename T>
typename WorldModel<T>::Output WorldModel<T>::forward(nn::Tape<T>& tape, std::span<const FrameTokens> window) const {
  const auto& L = cfg_.layout;
  const std::size_t w = window.size();
  if (w == 0 || w > L.t_max) {
    throw ConfigError("window of " + std::to_string(w) + " frames exceeds t_max " + std::to_string(L.t_max));
  }
  const std::size_t n = L.tokens_per_frame();
  std::vector<std::size_t> codes;
  std::vector<agent::SlotState> slots;
  for (const auto& f : window) {
    if (f.map.size() != L.n_map || f.slots.size() != L.n_agent) throw ConfigError("frame tokens do not match the layout");
    codes.insert(codes.end(), f.map.begin(), f.map.end());
    slots.insert(slots.end(), f.slots.begin(), f.slots.end());
  }
  for (auto c : codes) {
    if (c >= cfg_.codebook_size) throw ConfigError("map token " + std::to_string(c) + " out of range");
  }
  const auto book = tape.constant(codebook_);
  const auto map_rows = map_in_(nn::gather_rows(book, std::span<const std::size_t>(codes)));
  const auto agent_rows = agent_in_(tape, slots);

  // Interleave into frame-major order and add slot/frame embeddings.
  std::vector<std::size_t> order, slot_idx, frame_idx;
  const std::size_t map_total = w * L.n_map;
  for (std::size_t t = 0; t < w; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      order.push_back(k < L.n_map ? t * L.n_map + k : map_total + t * L.n_agent + (k - L.n_map));
      slot_idx.push_back(k);
      frame_idx.push_back(t);
    }
  }
  const std::vector<nn::Var<T>> parts{map_rows, agent_rows};
  auto x = nn::gather_rows(nn::concat_rows(std::span<const nn::Var<T>>(parts)), std::span<const std::size_t>(order));
  x = nn::add(x, nn::gather_rows(tape.param(*spatial_), std::span<const std::size_t>(slot_idx)));
  x = nn::add(x, nn::gather_rows(tape.param(*temporal_), std::span<const std::size_t>(frame_idx)));

  const auto mask = build_scene_mask(w, n);
  for (const auto& b : blocks_) x = b(x, mask);
  x = final_ln_(x);

  std::vector<std::size_t> map_pos, agent_pos;
  for (std::size_t t = 0; t < w; ++t) {
    for (std::size_t k = 0; k < n; ++k) (k < L.n_map ? map_pos : agent_pos).push_back(t * n + k);
  }
  return {map_head_(nn::gather_rows(x, std::span<const std::size_t>(map_pos))),
          agent_head_(nn::gather_rows(x, std::span<const std::size_t>(agent_pos)))};
}

scene::Pose2D residual_base(const agent::SlotState& input, const agent::AgentTokConfig& cfg) {
  if (!input.visible) return {};
  return agent::dequantize_state(agent::quantize_state(input.pose, cfg), cfg);
}

agent::SlotState decode_agent(const agent::SlotState& input, std::span<const double> row, const agent::AgentTokConfig& cfg) {
  const auto base = residual_base(input, cfg);
  agent::SlotState out;
  out.visible = row[kOutVis] > 0.0;
  out.pose.x = base.x + row[kOutX];
  out.pose.y = base.y + row[kOutY];
  out.pose.heading = scene::normalize_angle(base.heading + row[kOutHeading] * std::numbers::pi / 180.0);
  return out;
}

template <typename T>
FrameTokens predict_next(const WorldModel<T>& model, std::span<const FrameTokens> window) {
  nn::Tape<T> tape;
  const auto out = model.forward(tape, window);
  const auto& L = model.config().layout;
  const std::size_t last = window.size() - 1;
  const auto& logits = out.map_logits.value();
  const auto& agents = out.agent_out.value();
  FrameTokens next;
  for (std::size_t k = 0; k < L.n_map; ++k) {
    const std::size_t r = last * L.n_map + k;
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    next.map.push_back(best);
  }
  for (std::size_t a = 0; a < L.n_agent; ++a) {
    const std::size_t r = last * L.n_agent + a;
    std::array<double, kAgentOutCols> row{};
    for (std::size_t c = 0; c < kAgentOutCols; ++c) row[c] = static_cast<double>(agents(r, c));
    next.slots.push_back(decode_agent(residual_input(window[last], a), row, model.config().agent));
  }
  return next;
}

template class WorldModel<float>;
template class WorldModel<double>;
template FrameTokens predict_next(const WorldModel<float>&, std::span<const FrameTokens>);
template FrameTokens predict_next(const WorldModel<double>&, std::span<const FrameTokens>);

}  // namespace gpd::world
