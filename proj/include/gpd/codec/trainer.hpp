#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "gpd/codec/loss.hpp"
#include "gpd/nn/checkpoint.hpp"
#include "gpd/nn/optim.hpp"

namespace gpd::codec {

/// One training example: the canvas plus its lane targets.
struct CodecSample {
  raster::RasterCanvas canvas;
  scene::MapLines lines;                             // clipped, canonical, nearest-first
  std::vector<std::vector<scene::Vec2>> targets;     // lines resampled to P points
};

/// Ego-centric canvas and targets for one frame.
CodecSample make_codec_sample(const scene::SceneFrame& frame, const CodecConfig& cfg);

struct CodecTrainConfig {
  std::int64_t steps = 5000;
  std::size_t batch = 4;
  double lr = 5e-4;
  double codebook_lr = 1.5e-3;
  double weight_decay = 1e-4;
  std::int64_t warmup = 100;
  std::uint64_t seed = 0;
  std::int64_t dead_code_steps = 500;
  CodecLossWeights weights;
};

struct CodecStepStats {
  std::int64_t step = 0;
  double total = 0.0;
  double position = 0.0;
  double visibility = 0.0;
  double codebook = 0.0;
  double commitment = 0.0;
  std::size_t codes_used = 0;
};

class CodecTrainer {
 public:
  CodecTrainer(CodecModel<float>& model, std::vector<CodecSample> data, CodecTrainConfig cfg);

  /// One optimizer step. Throws NumericalError on a non-finite loss or
  /// gradient before touching the parameters.
  CodecStepStats step();
  std::int64_t steps_done() const { return opt_.state().step; }
  const CodecTrainConfig& config() const { return cfg_; }

  /// Model, optimizer moments and codebook bookkeeping.
  nn::Checkpoint checkpoint() const;
  void restore(const nn::Checkpoint& ckpt);

 private:
  std::vector<std::size_t> batch_indices(std::int64_t step) const;
  void init_codebook();
  void reseed_dead_codes(const std::vector<nn::Tensor<float>>& latents);

  CodecModel<float>& model_;
  std::vector<CodecSample> data_;
  CodecTrainConfig cfg_;
  nn::AdamW<float> opt_;
  std::vector<float> last_used_;
  bool book_ready_ = false;
};

/// Mean point-level F1 of decoded visible lanes against each sample's lines.
double mean_reconstruction_f1(const CodecModel<float>& model, const std::vector<CodecSample>& data);

nn::Checkpoint codec_checkpoint(const CodecModel<float>& model);
void save_codec(const CodecModel<float>& model, const std::filesystem::path& path);
std::unique_ptr<CodecModel<float>> codec_from_checkpoint(const nn::Checkpoint& ckpt);
std::unique_ptr<CodecModel<float>> load_codec(const std::filesystem::path& path);

}  // namespace gpd::codec
