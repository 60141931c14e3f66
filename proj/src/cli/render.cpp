#include "gpd/cli/render.hpp"

#include <sstream>

#include "gpd/scene/geometry.hpp"
#include "gpd/scene/scenario_io.hpp"

namespace gpd::cli {

namespace {

struct View {
  scene::Pose2D ego;
  double h;
  double s;
  // Forward (+x) up, left (+y) to the left.
  std::string pt(scene::Vec2 world) const {
    const auto p = scene::apply_inverse(ego, world);
    return scene::format_double((h - p.y) * s) + "," + scene::format_double((h - p.x) * s);
  }
};

void lines(std::ostream& out, const View& v, const scene::MapLines& map, const char* style) {
  for (const auto& l : scene::clip_map_to_region(scene::transform_map(map, v.ego, true), v.h)) {
    out << "  <polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i) out << ' ';
      out << v.pt(scene::apply(v.ego, l[i]));
    }
    out << "\"/>\n";
  }
}

void box(std::ostream& out, const View& v, const scene::AgentState& a, const char* style) {
  const auto c = scene::box_corners(a.pose, a.length, a.width);
  out << "  <polygon " << style << " points=\"" << v.pt(c[0]) << ' ' << v.pt(c[1]) << ' ' << v.pt(c[2]) << ' '
      << v.pt(c[3]) << "\"/>\n";
}

}  // namespace

std::string render_svg(const scene::SceneFrame& frame, const RenderOptions& opt, const scene::SceneFrame* overlay) {
  const View v{frame.ego.pose, opt.half_extent, opt.pixels_per_metre};
  const std::string size = scene::format_double(2.0 * opt.half_extent * opt.pixels_per_metre);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size << "\" fill=\"#f4f4f0\"/>\n";
  if (overlay != nullptr) {
    lines(out, v, overlay->map, "stroke=\"#9aa\" stroke-width=\"1\" stroke-dasharray=\"4 3\"");
    for (const auto& a : overlay->agents) {
      if (a.visible) box(out, v, a, "fill=\"none\" stroke=\"#9aa\" stroke-dasharray=\"3 2\"");
    }
  }
  lines(out, v, frame.map, "stroke=\"#333\" stroke-width=\"1.5\"");
  for (const auto& a : frame.agents) {
    if (a.visible) box(out, v, a, "fill=\"#4a7fc1\" fill-opacity=\"0.7\" stroke=\"#1d3d66\"");
  }
  box(out, v, frame.ego, "fill=\"#d9534f\" stroke=\"#7a1f1c\"");
  out << "</svg>\n";
  return out.str();
}

}  // namespace gpd::cli
