#pragma once

#include <string>

#include "gpd/scene/types.hpp"

namespace gpd::cli {

struct RenderOptions {
  double half_extent = 32.0;
  double pixels_per_metre = 8.0;
};

/// Ego-centric SVG of one frame: forward is up, left is left. Map lines,
/// oriented agent boxes (invisible agents omitted), ego highlighted. When
/// `overlay` is given its map and agents are drawn dashed underneath.
std::string render_svg(const scene::SceneFrame& frame, const RenderOptions& opt = {},
                       const scene::SceneFrame* overlay = nullptr);

}  // namespace gpd::cli
