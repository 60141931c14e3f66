#include "gpd/world/mask.hpp"

namespace gpd::world {

nn::MaskPtr build_scene_mask(std::size_t frames, std::size_t tokens_per_frame) {
  auto m = std::make_shared<nn::AttentionMask>();
  const std::size_t n = frames * tokens_per_frame;
  m->rows = n;
  m->cols = n;
  m->allowed.assign(n * n, 0);
  // Future-blocking triangle, then open each frame's diagonal block.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m->allowed[i * n + j] = 1;
  }
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t lo = t * tokens_per_frame;
    for (std::size_t i = lo; i < lo + tokens_per_frame; ++i) {
      for (std::size_t j = lo; j < lo + tokens_per_frame; ++j) m->allowed[i * n + j] = 1;
    }
  }
  return m;
}

}  // namespace gpd::world
