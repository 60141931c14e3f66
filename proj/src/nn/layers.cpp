#include "gpd/nn/layers.hpp"

#include <cmath>

#include "gpd/scene/error.hpp"

namespace gpd::nn {

std::vector<double> sinusoidal(double position, std::size_t dim) {
  if (dim % 2 != 0) throw ConfigError("sinusoidal embedding needs an even dimension, got " + std::to_string(dim));
  std::vector<double> e(dim);
  for (std::size_t k = 0; k < dim / 2; ++k) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * k) / static_cast<double>(dim));
    e[2 * k] = std::sin(position * freq);
    e[2 * k + 1] = std::cos(position * freq);
  }
  return e;
}

template <typename T>
Parameter<T>& ParameterSet<T>::add(std::string name, Shape shape, int group) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter<T>>();
  p->name = std::move(name);
  p->value = Tensor<T>(shape, T(0));
  p->grad = Tensor<T>(shape, T(0));
  p->group = group;
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename T>
Parameter<T>* ParameterSet<T>::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* ParameterSet<T>::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
std::vector<Parameter<T>*> ParameterSet<T>::all() {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> ParameterSet<T>::all() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& p : params_) p->grad.fill(T(0));
}

template <typename T>
void init_uniform(Parameter<T>& p, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value.values()) v = static_cast<T>(dist(rng));
}

template <typename T>
void init_xavier(Parameter<T>& p, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  init_uniform(p, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template <typename T>
Linear<T>::Linear(ParameterSet<T>& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng, bool bias) {
  w_ = &ps.add(name + ".w", {in, out});
  init_xavier(*w_, in, out, rng);
  if (bias) b_ = &ps.add(name + ".b", {out});
}

template <typename T>
Var<T> Linear<T>::operator()(const Var<T>& x) const {
  Tape<T>& tp = x.tape();
  Var<T> y = matmul(x, tp.param(*w_));
  return b_ ? add_row(y, tp.param(*b_)) : y;
}

template <typename T>
LayerNorm<T>::LayerNorm(ParameterSet<T>& ps, const std::string& name, std::size_t dim) {
  gamma_ = &ps.add(name + ".gamma", {dim});
  gamma_->value.fill(T(1));
  beta_ = &ps.add(name + ".beta", {dim});
}

template <typename T>
Var<T> LayerNorm<T>::operator()(const Var<T>& x) const {
  Tape<T>& tp = x.tape();
  return layer_norm(x, tp.param(*gamma_), tp.param(*beta_));
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParameterSet<T>& ps, const std::string& name, std::size_t dim,
                                          std::size_t heads, Rng& rng)
    : dim_(dim), heads_(heads) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention dim " + std::to_string(dim) + " not divisible by " + std::to_string(heads) + " heads");
  }
  q_ = Linear<T>(ps, name + ".q", dim, dim, rng);
  k_ = Linear<T>(ps, name + ".k", dim, dim, rng);
  v_ = Linear<T>(ps, name + ".v", dim, dim, rng);
  o_ = Linear<T>(ps, name + ".o", dim, dim, rng);
}

template <typename T>
Var<T> MultiHeadAttention<T>::operator()(const Var<T>& query, const Var<T>& source, const MaskPtr& mask) const {
  const Var<T> q = q_(query);
  const Var<T> k = k_(source);
  const Var<T> v = v_(source);
  const std::size_t dh = dim_ / heads_;
  const T inv = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<Var<T>> outs;
  outs.reserve(heads_);
  for (std::size_t h = 0; h < heads_; ++h) {
    const Var<T> qh = slice_cols(q, h * dh, dh);
    const Var<T> kh = slice_cols(k, h * dh, dh);
    const Var<T> vh = slice_cols(v, h * dh, dh);
    const Var<T> w = softmax_rows(scale(matmul_nt(qh, kh), inv), mask);
    outs.push_back(matmul(w, vh));
  }
  const Var<T> joined = heads_ == 1 ? outs[0] : concat_cols<T>(outs);
  return o_(joined);
}

template <typename T>
FeedForward<T>::FeedForward(ParameterSet<T>& ps, const std::string& name, std::size_t dim, std::size_t hidden, Rng& rng)
    : fc1_(ps, name + ".fc1", dim, hidden, rng), fc2_(ps, name + ".fc2", hidden, dim, rng) {}

template <typename T>
Var<T> FeedForward<T>::operator()(const Var<T>& x) const {
  return fc2_(gelu(fc1_(x)));
}

template <typename T>
SelfAttentionBlock<T>::SelfAttentionBlock(ParameterSet<T>& ps, const std::string& name, std::size_t dim,
                                          std::size_t heads, std::size_t hidden, Rng& rng)
    : ln1_(ps, name + ".ln1", dim),
      ln2_(ps, name + ".ln2", dim),
      attn_(ps, name + ".attn", dim, heads, rng),
      ffn_(ps, name + ".ffn", dim, hidden, rng) {}

template <typename T>
Var<T> SelfAttentionBlock<T>::operator()(const Var<T>& x, const MaskPtr& mask) const {
  const Var<T> h = ln1_(x);
  const Var<T> x1 = add(x, attn_(h, h, mask));
  return add(x1, ffn_(ln2_(x1)));
}

template <typename T>
QueryDecoderBlock<T>::QueryDecoderBlock(ParameterSet<T>& ps, const std::string& name, std::size_t dim,
                                        std::size_t heads, std::size_t hidden, Rng& rng)
    : ln1_(ps, name + ".ln1", dim),
      ln2_(ps, name + ".ln2", dim),
      ln3_(ps, name + ".ln3", dim),
      self_(ps, name + ".self", dim, heads, rng),
      cross_(ps, name + ".cross", dim, heads, rng),
      ffn_(ps, name + ".ffn", dim, hidden, rng) {}

template <typename T>
Var<T> QueryDecoderBlock<T>::operator()(const Var<T>& queries, const Var<T>& memory) const {
  const Var<T> h = ln1_(queries);
  const Var<T> x1 = add(queries, self_(h, h, nullptr));
  const Var<T> x2 = add(x1, cross_(ln2_(x1), memory, nullptr));
  return add(x2, ffn_(ln3_(x2)));
}

#define GPD_INSTANTIATE_LAYERS(T)                                           \
  template class ParameterSet<T>;                                           \
  template void init_uniform(Parameter<T>&, double, Rng&);                  \
  template void init_xavier(Parameter<T>&, std::size_t, std::size_t, Rng&); \
  template class Linear<T>;                                                 \
  template class LayerNorm<T>;                                              \
  template class MultiHeadAttention<T>;                                     \
  template class FeedForward<T>;                                            \
  template class SelfAttentionBlock<T>;                                     \
  template class QueryDecoderBlock<T>;

GPD_INSTANTIATE_LAYERS(float)
GPD_INSTANTIATE_LAYERS(double)

}  // namespace gpd::nn
