#pragma once

#include <vector>

#include "gpd/nn/tape.hpp"

namespace gpd::codec {

/// Index of the nearest codebook row (squared L2) for each row of z.
/// Ties resolve to the lowest index. z: [N x D], book: [K x D].
template <typename T>
std::vector<std::size_t> nearest_codes(const nn::Tensor<T>& z, const nn::Tensor<T>& book);

/// Forward value of `quantized`, gradient passed unchanged to `z`.
template <typename T>
nn::Var<T> straight_through(const nn::Var<T>& z, const nn::Var<T>& quantized);

}  // namespace gpd::codec
