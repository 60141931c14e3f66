#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gpd::agent {

/// Coarse-to-fine quantization intervals, e.g. {1, 0.01}.
struct QuantScheme {
  std::vector<double> levels;

  /// Throws ConfigError unless levels are positive, strictly decreasing,
  /// and each ratio levels[i-1] / levels[i] is an integer.
  void validate() const;
  std::string to_string() const;
  static QuantScheme parse(const std::string& text);
  friend bool operator==(const QuantScheme&, const QuantScheme&) = default;
};

inline QuantScheme position_scheme() { return {{1.0, 0.01}}; }
inline QuantScheme heading_scheme() { return {{20.0, 1.0}}; }

/// q_1 = floor(p / s_1), q_i = floor(residual / s_i). The finest index
/// floor(p / s_N) is computed once and split into levels with integer
/// arithmetic, so decimal inputs such as 12.34 land on (12, 34).
std::vector<std::int64_t> quantize_scalar(double p, const QuantScheme& scheme);
/// Sum of q_i * s_i.
double dequantize(const std::vector<std::int64_t>& q, const QuantScheme& scheme);

/// Wraps radians to [0, 360) degrees.
double heading_degrees(double radians);

}  // namespace gpd::agent
