#pragma once

#include <functional>
#include <string>
#include <vector>

#include "recedit/rng.hpp"
#include "recedit/tensor.hpp"

namespace recedit::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  size_t n_checked = 0;
  bool passed = false;
};

// Compares analytic gradients against central finite differences on up to
// `samples_per_tensor` coordinates of each parameter. `loss_fn` must
// evaluate the loss for the current parameter values; when `accumulate`
// is true it must also leave gradients in params[*].grad.
GradCheckReport grad_check(
    const std::function<double(ParameterStore&, bool accumulate)>& loss_fn, ParameterStore& params,
    double epsilon, double tolerance, size_t samples_per_tensor, Rng& rng);

}  // namespace recedit::nn
