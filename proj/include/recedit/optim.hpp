#pragma once

#include <map>
#include <string>

#include "recedit/tensor.hpp"

namespace recedit::nn {

struct LambOptions {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double weight_decay = 0.0;
  double trust_clamp_lo = 0.01;
  double trust_clamp_hi = 10.0;
};

// Adam-style moments plus a per-tensor trust ratio.
struct OptimizerState {
  LambOptions options;
  int64_t step = 0;
  std::map<std::string, TensorValue> first_moment;
  std::map<std::string, TensorValue> second_moment;
};

OptimizerState make_optimizer_state(const ParameterStore& params, LambOptions options);

// One LAMB update from the gradients accumulated in `params[*].grad`.
// Gradients are left untouched; callers zero them between steps.
void lamb_step(ParameterStore& params, OptimizerState& state);

}  // namespace recedit::nn
