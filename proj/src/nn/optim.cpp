#include "gpd/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gpd::nn {

template <typename T>
AdamW<T>::AdamW(std::vector<Parameter<T>*> params, AdamWOptions opts) : params_(std::move(params)), opts_(std::move(opts)) {
  for (auto* p : params_) {
    state_.m.emplace_back(p->value.shape(), T(0));
    state_.v.emplace_back(p->value.shape(), T(0));
  }
}

template <typename T>
void AdamW<T>::step(double lr_scale) {
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double bc1 = 1.0 - std::pow(opts_.beta1, t);
  const double bc2 = 1.0 - std::pow(opts_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter<T>& p = *params_[k];
    if (p.grad.size() != p.value.size()) continue;
    const auto it = opts_.group_lr.find(p.group);
    const double lr = (it == opts_.group_lr.end() ? opts_.lr : it->second) * lr_scale;
    Tensor<T>& m = state_.m[k];
    Tensor<T>& v = state_.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      const double mi = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g;
      const double vi = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = (mi / bc1) / (std::sqrt(vi / bc2) + opts_.eps) + opts_.weight_decay * p.value[i];
      p.value[i] = static_cast<T>(p.value[i] - lr * update);
    }
  }
}

double warmup_cosine(std::int64_t step, std::int64_t warmup, std::int64_t total, double floor) {
  if (warmup > 0 && step < warmup) return static_cast<double>(step + 1) / static_cast<double>(warmup);
  if (total <= warmup) return 1.0;
  const double progress = std::clamp(static_cast<double>(step - warmup) / static_cast<double>(total - warmup), 0.0, 1.0);
  return floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace gpd::nn
