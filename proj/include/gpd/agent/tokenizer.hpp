#pragma once

#include <vector>

#include "gpd/agent/quantization.hpp"
#include "gpd/nn/layers.hpp"
#include "gpd/scene/types.hpp"

namespace gpd::agent {

struct AgentTokConfig {
  QuantScheme position = position_scheme();
  QuantScheme heading = heading_scheme();
  std::size_t level_dim = 32;
  std::size_t model_dim = 128;
  double half_extent = 32.0;

  /// 3 channels (x, y, heading) times their level counts times level_dim.
  std::size_t pos_vec_dim() const;
};

void validate(const AgentTokConfig& cfg);

/// Sinusoidal code of an integer level index. Throws ConfigError on odd dim.
std::vector<double> sinusoidal_embed(std::int64_t q, std::size_t dim);

/// One slot's state in ego-frame metres / radians.
struct SlotState {
  bool visible = false;
  scene::Pose2D pose;
  friend bool operator==(const SlotState&, const SlotState&) = default;
};

/// Quantization levels of a visible state after clamping x, y to the region.
struct QuantizedState {
  std::vector<std::int64_t> x, y, heading;
  friend bool operator==(const QuantizedState&, const QuantizedState&) = default;
};

QuantizedState quantize_state(const scene::Pose2D& pose, const AgentTokConfig& cfg);
/// Reconstructed pose; heading returned in (-pi, pi].
scene::Pose2D dequantize_state(const QuantizedState& q, const AgentTokConfig& cfg);
/// Concatenated per-level sinusoidal codes, length pos_vec_dim().
std::vector<double> pos_vec(const QuantizedState& q, const AgentTokConfig& cfg);

/// Agent/ego embedding: pos_vec -> Linear -> GELU -> Linear, or the shared
/// learnable token for invisible slots.
template <typename T>
class AgentEmbedder {
 public:
  AgentEmbedder() = default;
  AgentEmbedder(nn::ParameterSet<T>& ps, const std::string& name, const AgentTokConfig& cfg, nn::Rng& rng);

  /// [states.size() x model_dim].
  nn::Var<T> operator()(nn::Tape<T>& tape, const std::vector<SlotState>& states) const;
  const AgentTokConfig& config() const { return cfg_; }

 private:
  AgentTokConfig cfg_;
  nn::Linear<T> fc1_, fc2_;
  nn::Parameter<T>* invisible_ = nullptr;
};

}  // namespace gpd::agent
