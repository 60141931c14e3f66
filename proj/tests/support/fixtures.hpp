#pragma once

#include "gpd/codec/model.hpp"
#include "gpd/synth/scenario_gen.hpp"

namespace gpd::testing {

// 64-pixel canvas (1 m per pixel) keeps the convolution cheap in tests.
inline codec::CodecConfig small_codec_config() {
  codec::CodecConfig cfg;
  cfg.raster.canvas_size = 64;
  cfg.raster.interp_step = 0.25;
  cfg.latent_dim = 32;
  cfg.codebook_size = 16;
  cfg.queries = 8;
  cfg.points = 6;
  cfg.decoder_hidden = 64;
  return cfg;
}

inline scene::Scenario scenario(std::uint64_t seed, int frames = 30, int agents = 4,
                                synth::RoadKind kind = synth::RoadKind::Straight) {
  synth::GenConfig g;
  g.road.kind = kind;
  g.seed = seed;
  g.horizon_frames = frames;
  g.n_agents = agents;
  return synth::gen_scenario(g);
}

}  // namespace gpd::testing
