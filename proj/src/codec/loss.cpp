#include "gpd/codec/loss.hpp"

#include <cmath>

namespace gpd::codec {

scene::CostMatrix match_cost(const nn::Tensor<double>& points, const nn::Tensor<double>& logits,
                             const std::vector<std::vector<scene::Vec2>>& gt, double vis_weight) {
  const std::size_t q = points.rows();
  scene::CostMatrix cost(q, gt.size());
  for (std::size_t i = 0; i < q; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-logits[i]));
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const auto& line = gt[g];
      if (2 * line.size() != points.cols()) throw nn::ShapeError("match_cost: GT line has " + std::to_string(line.size()) + " points");
      double l1 = 0.0;
      for (std::size_t k = 0; k < line.size(); ++k) {
        l1 += std::abs(points(i, 2 * k) - line[k].x) + std::abs(points(i, 2 * k + 1) - line[k].y);
      }
      cost(i, g) = l1 / static_cast<double>(line.size()) + vis_weight * (1.0 - p);
    }
  }
  return cost;
}

std::vector<long> match_queries(const scene::CostMatrix& cost, std::size_t queries) {
  std::vector<long> out(queries, -1);
  if (cost.cols == 0) return out;
  const auto a = scene::solve_assignment(cost);
  for (std::size_t i = 0; i < queries; ++i) out[i] = a.row_to_col[i];
  return out;
}

template <typename T>
CodecLoss<T> codec_loss(const typename CodecModel<T>::Decoded& pred, const std::vector<std::vector<scene::Vec2>>& gt,
                        const std::vector<long>& query_to_gt, const nn::Var<T>& z, const nn::Var<T>& v,
                        const CodecLossWeights& w) {
  auto& tape = z.tape();
  const std::size_t q = pred.points.shape()[0];
  const std::size_t cols = pred.points.shape()[1];
  CodecLoss<T> out;

  std::vector<std::size_t> rows;
  std::vector<T> target_vals;
  std::vector<T> vis(q, T(0));
  for (std::size_t i = 0; i < q; ++i) {
    if (query_to_gt[i] < 0) continue;
    vis[i] = T(1);
    rows.push_back(i);
    for (const auto& p : gt[static_cast<std::size_t>(query_to_gt[i])]) {
      target_vals.push_back(static_cast<T>(p.x));
      target_vals.push_back(static_cast<T>(p.y));
    }
  }
  out.matched = rows.size();

  nn::Var<T> total;
  if (!rows.empty()) {
    const auto matched = nn::gather_rows(pred.points, std::span<const std::size_t>(rows));
    const auto target = tape.constant(nn::Tensor<T>({rows.size(), cols}, std::move(target_vals)));
    const auto pos = nn::mean(nn::abs(nn::sub(matched, target)));
    out.position = static_cast<double>(pos.value()[0]);
    total = nn::scale(pos, static_cast<T>(w.position));
  }
  const auto bce = nn::bce_with_logits(pred.logits, std::span<const T>(vis));
  out.visibility = static_cast<double>(bce.value()[0]);
  const auto book = nn::mean(nn::square(nn::sub(nn::detach(z), v)));
  const auto commit = nn::mean(nn::square(nn::sub(z, nn::detach(v))));
  out.codebook = static_cast<double>(book.value()[0]);
  out.commitment = static_cast<double>(commit.value()[0]);
  const auto rest = nn::add(nn::add(nn::scale(bce, static_cast<T>(w.visibility)), nn::scale(book, static_cast<T>(w.codebook))),
                            nn::scale(commit, static_cast<T>(w.commitment)));
  out.total = total.valid() ? nn::add(total, rest) : rest;
  return out;
}

template CodecLoss<float> codec_loss<float>(const CodecModel<float>::Decoded&, const std::vector<std::vector<scene::Vec2>>&,
                                            const std::vector<long>&, const nn::Var<float>&, const nn::Var<float>&,
                                            const CodecLossWeights&);
template CodecLoss<double> codec_loss<double>(const CodecModel<double>::Decoded&, const std::vector<std::vector<scene::Vec2>>&,
                                              const std::vector<long>&, const nn::Var<double>&, const nn::Var<double>&,
                                              const CodecLossWeights&);

}  // namespace gpd::codec
