#pragma once

#include <vector>

#include "gpd/codec/model.hpp"
#include "gpd/scene/assignment.hpp"

namespace gpd::codec {

struct CodecLossWeights {
  double position = 1.0;
  double visibility = 1.0;
  double codebook = 1.0;
  double commitment = 0.25;
  double match_visibility = 1.0;  // weight of (1 - p) in the matching cost
};

/// cost(q, g) = mean over points of |dx| + |dy|, plus w * (1 - sigmoid(logit_q)).
/// points: [Q x 2P], logits: [Q x 1], gt: lines of P points.
scene::CostMatrix match_cost(const nn::Tensor<double>& points, const nn::Tensor<double>& logits,
                             const std::vector<std::vector<scene::Vec2>>& gt, double vis_weight = 1.0);

/// query_to_gt[q] = matched GT line or -1.
std::vector<long> match_queries(const scene::CostMatrix& cost, std::size_t queries);

template <typename T>
struct CodecLoss {
  nn::Var<T> total;
  double position = 0.0;
  double visibility = 0.0;
  double codebook = 0.0;
  double commitment = 0.0;
  std::size_t matched = 0;
};

/// Reconstruction and quantization losses for one sample.
/// position: sum |delta| over matched coordinates / (2P * matched).
/// visibility: mean BCE over all queries (target 1 iff matched).
/// codebook: mean (sg(z) - v)^2; commitment: mean (z - sg(v))^2.
template <typename T>
CodecLoss<T> codec_loss(const typename CodecModel<T>::Decoded& pred, const std::vector<std::vector<scene::Vec2>>& gt,
                        const std::vector<long>& query_to_gt, const nn::Var<T>& z, const nn::Var<T>& v,
                        const CodecLossWeights& w = {});

}  // namespace gpd::codec
