#pragma once

#include <filesystem>
#include <memory>

#include "gpd/codec/model.hpp"
#include "gpd/nn/checkpoint.hpp"
#include "gpd/nn/optim.hpp"
#include "gpd/world/loss.hpp"

namespace gpd::world {

struct WorldTrainConfig {
  std::int64_t steps = 5000;
  std::size_t batch = 1;
  std::size_t window = 0;  // frames per training window; 0 = t_max
  double lr = 1e-3;
  double weight_decay = 1e-4;
  std::int64_t warmup = 100;
  std::uint64_t seed = 0;
  /// Std-dev of Gaussian noise added to visible input slot poses (x, y in m;
  /// heading gets the same number in degrees). Targets stay clean, so the
  /// model learns to recover from its own rollout errors. 0 disables it.
  double pose_noise = 0.0;
  WorldLossWeights weights;
};

struct WorldStepStats {
  std::int64_t step = 0;
  double total = 0.0;
  double map_ce = 0.0;
  double agent_l1 = 0.0;
  double position_l1 = 0.0;
  double visibility = 0.0;
  double map_accuracy = 0.0;
};

class WorldTrainer {
 public:
  WorldTrainer(WorldModel<float>& model, std::vector<TokenizedScenario> data, WorldTrainConfig cfg);

  /// Throws NumericalError on a non-finite loss or gradient, before the update.
  WorldStepStats step();
  std::int64_t steps_done() const { return opt_.state().step; }

  nn::Checkpoint checkpoint(const std::string& codec_hash) const;
  void restore(const nn::Checkpoint& ckpt);

 private:
  struct Window {
    std::size_t scenario;
    std::size_t start;
  };
  std::vector<Window> windows_for(std::int64_t step) const;

  WorldModel<float>& model_;
  std::vector<TokenizedScenario> data_;
  WorldTrainConfig cfg_;
  std::size_t window_;
  std::vector<Window> all_windows_;
  nn::AdamW<float> opt_;
};

struct WorldEval {
  double map_accuracy = 0.0;
  double agent_l1 = 0.0;
  double position_l1 = 0.0;
  double visibility = 0.0;
};

/// Teacher-forced metrics over consecutive chunks of `window` frames.
WorldEval evaluate_teacher_forced(const WorldModel<float>& model, const std::vector<TokenizedScenario>& data,
                                  std::size_t window);

/// Content hash identifying a codec's parameters.
std::string codec_hash(const codec::CodecModel<float>& codec);

nn::Checkpoint world_checkpoint(const WorldModel<float>& model, const std::string& codec_hash);
void save_world(const WorldModel<float>& model, const std::string& codec_hash, const std::filesystem::path& path);
/// Throws ConfigError naming both hashes when the codec does not match.
std::unique_ptr<WorldModel<float>> world_from_checkpoint(const nn::Checkpoint& ckpt, const codec::CodecModel<float>& codec);
std::unique_ptr<WorldModel<float>> load_world(const std::filesystem::path& path, const codec::CodecModel<float>& codec);

}  // namespace gpd::world
