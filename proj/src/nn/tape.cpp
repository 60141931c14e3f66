#include "gpd/nn/tape.hpp"

namespace gpd::nn {

template <typename T>
Var<T> Tape<T>::push(Tensor<T> value, std::vector<std::size_t> inputs, Backward fn, Parameter<T>* param) {
  Node n;
  n.value = std::move(value);
  n.param = param;
  n.requires_grad = param != nullptr;
  for (auto i : inputs) n.requires_grad = n.requires_grad || nodes_[i].requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Tensor<T>& Tape<T>::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor<T>(n.value.shape(), T(0));
  return n.grad;
}

template <typename T>
void Tape<T>::backward(const Var<T>& loss) {
  if (&loss.tape() != this) throw std::invalid_argument("backward: loss recorded on another tape");
  if (loss.value().size() != 1) throw ShapeError("backward needs a scalar loss, got " + shape_str(loss.shape()));
  for (auto& n : nodes_) n.grad = Tensor<T>();
  grad(loss.id())[0] = T(1);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) {
      Parameter<T>& p = *n.param;
      if (p.grad.size() != p.value.size()) p.grad = Tensor<T>(p.value.shape(), T(0));
      for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[i];
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace gpd::nn
