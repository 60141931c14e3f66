#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gpd/scene/types.hpp"

namespace gpd::raster {

struct RasterConfig {
  double region_half_extent = 32.0;
  int canvas_size = 256;
  double interp_step = 0.1;

  double resolution() const { return 2.0 * region_half_extent / canvas_size; }
};

/// Throws ConfigError unless every pixel gets at least two samples.
void validate(const RasterConfig& cfg);

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Row grows towards -x (ego backward), column grows towards +y (ego left).
/// Half-open intervals: points on the far boundary (x = -half or y = +half) map outside.
std::optional<Pixel> world_to_pixel(scene::Vec2 p, const RasterConfig& cfg);
/// Centre of a pixel in ego-frame metres.
scene::Vec2 pixel_center(Pixel px, const RasterConfig& cfg);

/// Binary bird's-eye canvas, row-major.
class RasterCanvas {
 public:
  explicit RasterCanvas(int size = 256) : size_(size), cells_(static_cast<std::size_t>(size) * size, 0) {}

  int size() const { return size_; }
  std::uint8_t at(int row, int col) const { return cells_[static_cast<std::size_t>(row) * size_ + col]; }
  void set(int row, int col) { cells_[static_cast<std::size_t>(row) * size_ + col] = 1; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }
  std::size_t count() const;

  friend bool operator==(const RasterCanvas&, const RasterCanvas&) = default;

 private:
  int size_;
  std::vector<std::uint8_t> cells_;
};

/// Marks every pixel touched by a dense arc-length walk along each polyline.
/// Expects ego-frame lines already clipped to the region.
RasterCanvas rasterize(const scene::MapLines& map, const RasterConfig& cfg = {});

/// Debug dump as binary PGM (P5), 1 -> 255.
void write_pgm(const RasterCanvas& canvas, const std::filesystem::path& path);

}  // namespace gpd::raster
