#include "gpd/raster/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gpd/scene/error.hpp"

namespace gpd::raster {

void validate(const RasterConfig& cfg) {
  if (!(cfg.region_half_extent > 0.0) || cfg.canvas_size <= 0) throw ConfigError("raster region and size must be positive");
  if (!(cfg.interp_step > 0.0) || cfg.interp_step > cfg.resolution() / 2.0) {
    throw ConfigError("interp_step must be at most half a pixel");
  }
}

std::optional<Pixel> world_to_pixel(scene::Vec2 p, const RasterConfig& cfg) {
  const double res = cfg.resolution();
  const double r = std::floor((cfg.region_half_extent - p.x) / res);
  const double c = std::floor((p.y + cfg.region_half_extent) / res);
  if (!(r >= 0.0 && r < cfg.canvas_size && c >= 0.0 && c < cfg.canvas_size)) return std::nullopt;
  return Pixel{static_cast<int>(r), static_cast<int>(c)};
}

scene::Vec2 pixel_center(Pixel px, const RasterConfig& cfg) {
  const double res = cfg.resolution();
  return {cfg.region_half_extent - (px.row + 0.5) * res, (px.col + 0.5) * res - cfg.region_half_extent};
}

std::size_t RasterCanvas::count() const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1)); }

RasterCanvas rasterize(const scene::MapLines& map, const RasterConfig& cfg) {
  validate(cfg);
  RasterCanvas canvas(cfg.canvas_size);
  auto mark = [&](scene::Vec2 p) {
    if (auto px = world_to_pixel(p, cfg)) canvas.set(px->row, px->col);
  };
  for (const auto& line : map) {
    const auto& pts = line.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const scene::Vec2 a = pts[i];
      const scene::Vec2 d = pts[i + 1] - a;
      const double len = scene::norm(d);
      const int steps = std::max(1, static_cast<int>(std::ceil(len / cfg.interp_step)));
      for (int k = 0; k < steps; ++k) mark(a + (static_cast<double>(k) / steps) * d);
    }
    mark(pts.back());
  }
  return canvas;
}

void write_pgm(const RasterCanvas& canvas, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << canvas.size() << ' ' << canvas.size() << "\n255\n";
  for (auto v : canvas.cells()) out.put(static_cast<char>(v ? 255 : 0));
}

}  // namespace gpd::raster
