#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gpd/nn/tensor.hpp"

namespace gpd::nn {

/// Trainable array with its accumulated gradient. `group` selects the
/// optimizer learning-rate group.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  int group = 0;
};

template <typename T>
class Tape;

/// Handle to a value recorded on a tape.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor<T>& value() const { return tape_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  /// Gradient after Tape::backward; empty if the node was not reached.
  const Tensor<T>& grad() const { return tape_->grad_or_empty(id_); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations from parameters/constants to a scalar loss and
/// replays them in reverse. Not thread-safe; one tape per training step.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), {}, nullptr, nullptr); }
  Var<T> param(Parameter<T>& p) { return push(p.value, {}, nullptr, &p); }

  /// Appends an op result. The backward closure reads grad(self) and adds
  /// into grad(input) for each input that requires a gradient.
  Var<T> record(Tensor<T> value, std::vector<std::size_t> inputs, Backward fn) {
    return push(std::move(value), std::move(inputs), std::move(fn), nullptr);
  }

  /// Reverse sweep from a single-element loss. Node gradients are reset
  /// first, parameter gradients are accumulated (call zero_grad between steps).
  void backward(const Var<T>& loss);

  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, allocated as zeros on first access.
  Tensor<T>& grad(std::size_t id);
  const Tensor<T>& grad_or_empty(std::size_t id) const { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
  };

  Var<T> push(Tensor<T> value, std::vector<std::size_t> inputs, Backward fn, Parameter<T>* param);

  std::deque<Node> nodes_;
};

}  // namespace gpd::nn
