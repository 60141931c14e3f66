#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gpd/nn/tape.hpp"

namespace gpd::nn {

/// Row-major boolean visibility matrix for attention: allowed(i, j) != 0
/// means query i may attend to key j.
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  bool operator()(std::size_t i, std::size_t j) const { return allowed[i * cols + j] != 0; }
};
using MaskPtr = std::shared_ptr<const AttentionMask>;

// Elementwise (identical shapes).
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T s);
template <typename T> Var<T> relu(const Var<T>& a);
template <typename T> Var<T> gelu(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> sigmoid(const Var<T>& a);
template <typename T> Var<T> square(const Var<T>& a);
template <typename T> Var<T> abs(const Var<T>& a);
/// Huber-style: 0.5 x^2 / delta for |x| < delta, |x| - 0.5 delta otherwise.
template <typename T> Var<T> smooth_l1(const Var<T>& a, T delta);

/// a[r, c] + b[c]; b has shape [cols].
template <typename T> Var<T> add_row(const Var<T>& a, const Var<T>& b);
/// [M x K] * [K x N].
template <typename T> Var<T> matmul(const Var<T>& a, const Var<T>& b);
/// [M x K] * [N x K]^T.
template <typename T> Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> transpose(const Var<T>& a);

/// Row softmax. With a mask, blocked entries get exactly zero weight and the
/// row is normalised over allowed entries only. Every row needs one allowed entry.
template <typename T> Var<T> softmax_rows(const Var<T>& a, const MaskPtr& mask = nullptr);
template <typename T> Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5));

template <typename T> Var<T> slice_cols(const Var<T>& a, std::size_t start, std::size_t len);
template <typename T> Var<T> slice_rows(const Var<T>& a, std::size_t start, std::size_t len);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T> Var<T> concat_rows(std::span<const Var<T>> parts);
/// out[i] = table[index[i]]; gradient scatters back into the table rows.
template <typename T> Var<T> gather_rows(const Var<T>& table, std::span<const std::size_t> index);
template <typename T> Var<T> reshape(const Var<T>& a, Shape shape);

template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> mean(const Var<T>& a);
/// Identity value, no gradient.
template <typename T> Var<T> detach(const Var<T>& a);

/// Mean cross-entropy over rows of [M x K] logits.
template <typename T> Var<T> cross_entropy(const Var<T>& logits, std::span<const std::size_t> targets);
/// Mean binary cross-entropy with logits; targets has the logits' size.
template <typename T> Var<T> bce_with_logits(const Var<T>& logits, std::span<const T> targets);

/// 2-D convolution of one sample. x: [C x H x W], w: [O x C*k*k], b: [O].
/// Returns [O x Ho x Wo] with Ho = (H + 2 pad - k) / stride + 1.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, std::size_t kernel, std::size_t stride,
              std::size_t pad);

}  // namespace gpd::nn
