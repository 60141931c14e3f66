#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gpd/nn/ops.hpp"

namespace gpd::nn {

using Rng = std::mt19937_64;

/// e[2k] = sin(pos / 10000^(2k/dim)), e[2k+1] = cos(...). dim must be even.
std::vector<double> sinusoidal(double position, std::size_t dim);

/// Owns every trainable array of a model. Parameter addresses are stable.
template <typename T>
class ParameterSet {
 public:
  Parameter<T>& add(std::string name, Shape shape, int group = 0);
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;
  std::vector<Parameter<T>*> all();
  std::vector<const Parameter<T>*> all() const;
  std::size_t count() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
template <typename T>
void init_xavier(Parameter<T>& p, std::size_t fan_in, std::size_t fan_out, Rng& rng);
template <typename T>
void init_uniform(Parameter<T>& p, double bound, Rng& rng);

/// y = x W + b with W stored [in x out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet<T>& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng, bool bias = true);
  Var<T> operator()(const Var<T>& x) const;
  Parameter<T>& weight() const { return *w_; }
  Parameter<T>* bias() const { return b_; }

 private:
  Parameter<T>* w_ = nullptr;
  Parameter<T>* b_ = nullptr;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterSet<T>& ps, const std::string& name, std::size_t dim);
  Var<T> operator()(const Var<T>& x) const;

 private:
  Parameter<T>* gamma_ = nullptr;
  Parameter<T>* beta_ = nullptr;
};

/// Scaled dot-product attention split over heads, followed by an output projection.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  /// Throws ConfigError when dim is not divisible by heads.
  MultiHeadAttention(ParameterSet<T>& ps, const std::string& name, std::size_t dim, std::size_t heads, Rng& rng);
  /// query: [M x dim], source: [S x dim], mask: M x S or null.
  Var<T> operator()(const Var<T>& query, const Var<T>& source, const MaskPtr& mask) const;

 private:
  std::size_t dim_ = 0;
  std::size_t heads_ = 0;
  Linear<T> q_, k_, v_, o_;
};

template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterSet<T>& ps, const std::string& name, std::size_t dim, std::size_t hidden, Rng& rng);
  Var<T> operator()(const Var<T>& x) const;

 private:
  Linear<T> fc1_, fc2_;
};

/// Pre-norm self-attention block: x += attn(ln(x)); x += ffn(ln(x)).
template <typename T>
class SelfAttentionBlock {
 public:
  SelfAttentionBlock() = default;
  SelfAttentionBlock(ParameterSet<T>& ps, const std::string& name, std::size_t dim, std::size_t heads,
                     std::size_t hidden, Rng& rng);
  Var<T> operator()(const Var<T>& x, const MaskPtr& mask) const;

 private:
  LayerNorm<T> ln1_, ln2_;
  MultiHeadAttention<T> attn_;
  FeedForward<T> ffn_;
};

/// Pre-norm query decoder block: self-attention among queries, then
/// cross-attention into a memory, then feed-forward.
template <typename T>
class QueryDecoderBlock {
 public:
  QueryDecoderBlock() = default;
  QueryDecoderBlock(ParameterSet<T>& ps, const std::string& name, std::size_t dim, std::size_t heads,
                    std::size_t hidden, Rng& rng);
  Var<T> operator()(const Var<T>& queries, const Var<T>& memory) const;

 private:
  LayerNorm<T> ln1_, ln2_, ln3_;
  MultiHeadAttention<T> self_, cross_;
  FeedForward<T> ffn_;
};

}  // namespace gpd::nn
