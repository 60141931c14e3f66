#include "gpd/agent/quantization.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gpd/scene/error.hpp"
#include "gpd/scene/scenario_io.hpp"

namespace gpd::agent {

namespace {

std::int64_t ratio(double coarse, double fine) { return std::llround(coarse / fine); }

}  // namespace

void QuantScheme::validate() const {
  if (levels.empty()) throw ConfigError("quantization scheme needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0) || !std::isfinite(levels[i])) throw ConfigError("quantization levels must be positive");
    if (i == 0) continue;
    if (!(levels[i] < levels[i - 1])) throw ConfigError("quantization levels must decrease");
    const double r = levels[i - 1] / levels[i];
    if (std::abs(r - std::round(r)) > 1e-9 * r) {
      throw ConfigError("quantization level ratio " + std::to_string(r) + " is not an integer");
    }
  }
}

std::string QuantScheme::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) out += ',';
    out += scene::format_double(levels[i]);
  }
  return out;
}

QuantScheme QuantScheme::parse(const std::string& text) {
  QuantScheme s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) s.levels.push_back(scene::parse_double(item));
  s.validate();
  return s;
}

std::vector<std::int64_t> quantize_scalar(double p, const QuantScheme& scheme) {
  const std::size_t n = scheme.levels.size();
  std::int64_t fine = static_cast<std::int64_t>(std::floor(p / scheme.levels.back()));
  std::vector<std::int64_t> q(n);
  for (std::size_t i = n; i-- > 1;) {
    const std::int64_t r = ratio(scheme.levels[i - 1], scheme.levels[i]);
    std::int64_t rem = fine % r;
    if (rem < 0) rem += r;
    q[i] = rem;
    fine = (fine - rem) / r;
  }
  q[0] = fine;
  return q;
}

double dequantize(const std::vector<std::int64_t>& q, const QuantScheme& scheme) {
  double out = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) out += static_cast<double>(q[i]) * scheme.levels[i];
  return out;
}

double heading_degrees(double radians) {
  double d = std::fmod(radians * 180.0 / std::numbers::pi, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

}  // namespace gpd::agent
