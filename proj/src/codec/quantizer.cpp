#include "gpd/codec/quantizer.hpp"

#include <limits>

#include "gpd/scene/error.hpp"

namespace gpd::codec {

template <typename T>
std::vector<std::size_t> nearest_codes(const nn::Tensor<T>& z, const nn::Tensor<T>& book) {
  if (book.rows() == 0) throw ConfigError("quantize: empty codebook");
  if (z.cols() != book.cols()) throw nn::ShapeError("quantize", z.shape(), book.shape());
  const std::size_t d = z.cols();
  std::vector<std::size_t> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const T* zi = z.data() + i * d;
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < book.rows(); ++k) {
      const T* vk = book.data() + k * d;
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = static_cast<double>(zi[c]) - static_cast<double>(vk[c]);
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        arg = k;
      }
    }
    out[i] = arg;
  }
  return out;
}

template <typename T>
nn::Var<T> straight_through(const nn::Var<T>& z, const nn::Var<T>& quantized) {
  if (z.shape() != quantized.shape()) throw nn::ShapeError("straight_through", z.shape(), quantized.shape());
  auto& tape = z.tape();
  const std::size_t zid = z.id();
  return tape.record(quantized.value(), {zid}, [zid](nn::Tape<T>& t, std::size_t self) {
    if (!t.requires_grad(zid)) return;
    const auto& g = t.grad(self);
    auto& gz = t.grad(zid);
    for (std::size_t i = 0; i < g.size(); ++i) gz[i] += g[i];
  });
}

template std::vector<std::size_t> nearest_codes(const nn::Tensor<float>&, const nn::Tensor<float>&);
template std::vector<std::size_t> nearest_codes(const nn::Tensor<double>&, const nn::Tensor<double>&);
template nn::Var<float> straight_through(const nn::Var<float>&, const nn::Var<float>&);
template nn::Var<double> straight_through(const nn::Var<double>&, const nn::Var<double>&);

}  // namespace gpd::codec
