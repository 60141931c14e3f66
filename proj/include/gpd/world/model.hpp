#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "gpd/world/tokens.hpp"

namespace gpd::world {

struct WorldConfig {
  SceneLayout layout;
  std::size_t dim = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 256;
  std::size_t codebook_size = 128;
  std::size_t code_dim = 128;
  agent::AgentTokConfig agent;  // model_dim is forced to dim
};

void validate(const WorldConfig& cfg);
std::map<std::string, std::string> to_header(const WorldConfig& cfg);
WorldConfig world_config_from_header(const std::map<std::string, std::string>& header);

/// Columns of the agent head output.
/// Columns of the agent head output. Heading is the wrapped change from the
/// residual base in degrees, the unit of the heading tokenizer.
enum AgentOut : std::size_t { kOutX = 0, kOutY, kOutHeading, kOutVis, kAgentOutCols };

/// Autoregressive scene decoder over frame-major token sequences.
template <typename T>
class WorldModel {
 public:
  struct Output {
    nn::Var<T> map_logits;  // [W*n_map x K], frame-major
    nn::Var<T> agent_out;   // [W*n_agent x 5], frame-major
  };

  /// `codebook` is the frozen codec codebook [K x code_dim].
  WorldModel(const WorldConfig& cfg, nn::Tensor<T> codebook, std::uint64_t seed);
  WorldModel(const WorldModel&) = delete;
  WorldModel& operator=(const WorldModel&) = delete;

  const WorldConfig& config() const { return cfg_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  const nn::Tensor<T>& codebook() const { return codebook_; }

  /// Predictions for every frame of the window (1 <= W <= t_max).
  Output forward(nn::Tape<T>& tape, std::span<const FrameTokens> window) const;

 private:
  WorldConfig cfg_;
  nn::Tensor<T> codebook_;
  nn::ParameterSet<T> params_;
  nn::Linear<T> map_in_;
  agent::AgentEmbedder<T> agent_in_;
  nn::Parameter<T>* spatial_ = nullptr;
  nn::Parameter<T>* temporal_ = nullptr;
  std::vector<nn::SelfAttentionBlock<T>> blocks_;
  nn::LayerNorm<T> final_ln_;
  nn::Linear<T> map_head_;
  nn::Linear<T> agent_head_;
};

/// Reference pose the agent head's offsets are added to: the slot's
/// quantized input pose, or the origin for an invisible input.
scene::Pose2D residual_base(const agent::SlotState& input, const agent::AgentTokConfig& cfg);

/// Input slot whose pose serves as residual base for slot `a`. The ego slot
/// holds a per-frame delta and is predicted from the origin; a residual on
/// the previous delta integrates any head bias into a growing turn rate.
inline agent::SlotState residual_input(const FrameTokens& frame, std::size_t a) {
  return a == 0 ? agent::SlotState{} : frame.slots[a];
}

/// Decodes one agent-head row relative to its input slot.
agent::SlotState decode_agent(const agent::SlotState& input, std::span<const double> row, const agent::AgentTokConfig& cfg);

/// Greedy next frame after the last frame of the window.
template <typename T>
FrameTokens predict_next(const WorldModel<T>& model, std::span<const FrameTokens> window);

}  // namespace gpd::world
