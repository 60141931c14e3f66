#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gpd/codec/lanes.hpp"
#include "gpd/nn/layers.hpp"
#include "gpd/raster/raster.hpp"

namespace gpd::codec {

struct CodecConfig {
  raster::RasterConfig raster;
  int grid = 4;  // latent cells per side: 4 (x64 downsample) or 8 (x32)
  std::size_t latent_dim = 128;
  std::size_t codebook_size = 128;
  std::size_t queries = 16;
  std::size_t points = 12;
  std::size_t decoder_layers = 2;
  std::size_t decoder_heads = 4;
  std::size_t decoder_hidden = 256;

  std::size_t cells() const { return static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid); }
  /// Output channels of each stride-2 stage.
  std::vector<std::size_t> stage_channels() const;
};

/// Throws ConfigError for unsupported combinations.
void validate(const CodecConfig& cfg);

std::map<std::string, std::string> to_header(const CodecConfig& cfg);
CodecConfig codec_config_from_header(const std::map<std::string, std::string>& header);

/// Canvas as a [1 x S x S] tensor of 0/1 values.
template <typename T>
nn::Tensor<T> canvas_tensor(const raster::RasterCanvas& canvas);

/// Convolutional encoder, codebook, and query-based lane decoder.
template <typename T>
class CodecModel {
 public:
  struct Decoded {
    nn::Var<T> points;  // [Q x 2P], (x, y) interleaved, metres
    nn::Var<T> logits;  // [Q x 1] visibility logits
  };

  CodecModel(const CodecConfig& cfg, std::uint64_t seed);
  CodecModel(const CodecModel&) = delete;
  CodecModel& operator=(const CodecModel&) = delete;

  const CodecConfig& config() const { return cfg_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  nn::Parameter<T>& codebook() { return *codebook_; }
  const nn::Parameter<T>& codebook() const { return *codebook_; }

  /// Continuous latent grid, one row per cell (row-major over the grid): [N x D].
  nn::Var<T> encode(nn::Tape<T>& tape, const nn::Tensor<T>& canvas) const;
  /// Lane hypotheses from a quantized grid [N x D].
  Decoded decode(nn::Tape<T>& tape, const nn::Var<T>& zq) const;

  /// Encode + nearest-code lookup, no gradient.
  std::vector<std::size_t> tokenize(const raster::RasterCanvas& canvas) const;
  /// Lane hypotheses for a token grid.
  LaneSet decode_tokens(const std::vector<std::size_t>& tokens) const;

 private:
  struct Conv {
    nn::Parameter<T>* w = nullptr;
    nn::Parameter<T>* b = nullptr;
  };

  CodecConfig cfg_;
  nn::ParameterSet<T> params_;
  std::vector<Conv> convs_;
  nn::Linear<T> proj_;
  nn::Parameter<T>* codebook_ = nullptr;
  nn::Parameter<T>* queries_ = nullptr;
  nn::Tensor<T> memory_pos_;
  std::vector<nn::QueryDecoderBlock<T>> blocks_;
  nn::LayerNorm<T> final_ln_;
  nn::Linear<T> points_head_;
  nn::Linear<T> vis_head_;
};

/// Rows of the codebook for the given indices: [N x D].
template <typename T>
nn::Tensor<T> lookup(const nn::Tensor<T>& book, const std::vector<std::size_t>& idx);

}  // namespace gpd::codec
