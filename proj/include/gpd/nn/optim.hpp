#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gpd/nn/tape.hpp"

namespace gpd::nn {

struct AdamWOptions {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  /// Learning rate overrides per Parameter::group.
  std::map<int, double> group_lr;
};

/// First/second moment accumulators aligned with the parameter list.
template <typename T>
struct OptState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t step = 0;
};

/// Adam with decoupled weight decay.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<Parameter<T>*> params, AdamWOptions opts);

  /// Applies one update from Parameter::grad. `lr_scale` multiplies every
  /// group's learning rate (for schedules).
  void step(double lr_scale = 1.0);

  OptState<T>& state() { return state_; }
  const OptState<T>& state() const { return state_; }
  const std::vector<Parameter<T>*>& params() const { return params_; }
  const AdamWOptions& options() const { return opts_; }

 private:
  std::vector<Parameter<T>*> params_;
  AdamWOptions opts_;
  OptState<T> state_;
};

/// Linear warm-up followed by cosine decay to `floor` of the base rate.
double warmup_cosine(std::int64_t step, std::int64_t warmup, std::int64_t total, double floor = 0.1);

}  // namespace gpd::nn
