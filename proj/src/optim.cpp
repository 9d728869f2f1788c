#include "recedit/optim.hpp"

#include <algorithm>
#include <cmath>

namespace recedit::nn {

OptimizerState make_optimizer_state(const ParameterStore& params, LambOptions options) {
  OptimizerState state;
  state.options = options;
  for (const auto& [name, p] : params.params) {
    state.first_moment[name] = TensorValue(p.shape, 0.0);
    state.second_moment[name] = TensorValue(p.shape, 0.0);
  }
  return state;
}

void lamb_step(ParameterStore& params, OptimizerState& state) {
  const LambOptions& opt = state.options;
  state.step += 1;
  double bias1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  double bias2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));

  for (auto& [name, p] : params.params) {
    if (p.grad.empty()) continue;
    TensorValue& m = state.first_moment.at(name);
    TensorValue& v = state.second_moment.at(name);

    double w_norm_sq = 0.0;
    double r_norm_sq = 0.0;
    std::vector<double> update(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
      double g = p.grad[i];
      m.data[i] = opt.beta1 * m.data[i] + (1.0 - opt.beta1) * g;
      v.data[i] = opt.beta2 * v.data[i] + (1.0 - opt.beta2) * g * g;
      double m_hat = m.data[i] / bias1;
      double v_hat = v.data[i] / bias2;
      double r = m_hat / (std::sqrt(v_hat) + opt.epsilon) + opt.weight_decay * p.data[i];
      update[i] = r;
      w_norm_sq += p.data[i] * p.data[i];
      r_norm_sq += r * r;
    }
    double trust = 1.0;
    if (w_norm_sq > 0.0 && r_norm_sq > 0.0) {
      trust = std::clamp(std::sqrt(w_norm_sq) / std::sqrt(r_norm_sq), opt.trust_clamp_lo,
                         opt.trust_clamp_hi);
    }
    double step_size = opt.learning_rate * trust;
    for (size_t i = 0; i < p.size(); ++i) p.data[i] -= step_size * update[i];
  }
}

}  // namespace recedit::nn
