#pragma once

#include "gpd/nn/ops.hpp"

namespace gpd::world {

/// Scene-level mask over T frames of N tokens each: token i may attend to
/// token j iff frame(j) <= frame(i), i.e. causal across frames and fully
/// bidirectional inside a frame.
nn::MaskPtr build_scene_mask(std::size_t frames, std::size_t tokens_per_frame);

}  // namespace gpd::world
