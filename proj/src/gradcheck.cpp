#include "recedit/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace recedit::nn {

GradCheckReport grad_check(
    const std::function<double(ParameterStore&, bool accumulate)>& loss_fn, ParameterStore& params,
    double epsilon, double tolerance, size_t samples_per_tensor, Rng& rng) {
  params.zero_grads();
  double base = loss_fn(params, true);
  if (!std::isfinite(base)) throw std::runtime_error("grad_check: non-finite loss");

  GradCheckReport report;
  for (auto& [name, p] : params.params) {
    if (p.grad.size() != p.data.size()) continue;
    size_t n = p.size();
    size_t take = std::min(samples_per_tensor, n);
    for (size_t s = 0; s < take; ++s) {
      size_t idx = take == n ? s : static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(n) - 1));
      double saved = p.data[idx];
      p.data[idx] = saved + epsilon;
      double up = loss_fn(params, false);
      p.data[idx] = saved - epsilon;
      double down = loss_fn(params, false);
      p.data[idx] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::runtime_error("grad_check: non-finite loss at " + name);
      }
      double numeric = (up - down) / (2.0 * epsilon);
      double analytic = p.grad[idx];
      double rel = std::abs(analytic - numeric) /
                   std::max(1.0, std::abs(analytic) + std::abs(numeric));
      ++report.n_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = idx;
      }
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace recedit::nn
