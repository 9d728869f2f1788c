#include "recedit/metrics.hpp"

#include <algorithm>

namespace recedit::eval {

namespace {

size_t intersection_size(const std::set<int>& a, const std::set<int>& b) {
  size_t n = 0;
  for (int x : a) n += b.count(x);
  return n;
}

std::set<int> difference(const std::set<int>& a, const std::set<int>& b) {
  std::set<int> out;
  for (int x : a) {
    if (!b.count(x)) out.insert(x);
  }
  return out;
}

}  // namespace

double set_iou(const std::set<int>& pred, const std::set<int>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  size_t inter = intersection_size(pred, gold);
  return static_cast<double>(inter) / static_cast<double>(pred.size() + gold.size() - inter);
}

double set_f1(const std::set<int>& pred, const std::set<int>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  size_t inter = intersection_size(pred, gold);
  return 2.0 * static_cast<double>(inter) / static_cast<double>(pred.size() + gold.size());
}

PrecisionRecallF1 set_prf(const std::set<int>& pred, const std::set<int>& gold) {
  PrecisionRecallF1 out;
  size_t inter = intersection_size(pred, gold);
  out.precision = pred.empty() ? (gold.empty() ? 1.0 : 0.0)
                               : static_cast<double>(inter) / static_cast<double>(pred.size());
  out.recall = gold.empty() ? (pred.empty() ? 1.0 : 0.0)
                            : static_cast<double>(inter) / static_cast<double>(gold.size());
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

EditMetrics edit_metrics(const std::set<int>& base, const std::set<int>& pred,
                         const std::set<int>& gold) {
  EditMetrics out;
  out.insertion = set_prf(difference(pred, base), difference(gold, base));
  out.deletion = set_prf(difference(base, pred), difference(base, gold));
  return out;
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0);
  std::vector<size_t> cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return 0.0;
  double lcs = static_cast<double>(lcs_length(pred, gold));
  if (lcs == 0.0) return 0.0;
  double p = lcs / static_cast<double>(pred.size());
  double r = lcs / static_cast<double>(gold.size());
  return 2.0 * p * r / (p + r);
}

double distinct_n(const std::vector<std::vector<std::string>>& texts, size_t n) {
  if (n < 1) throw ValidationError("distinct_n: n must be >= 1");
  std::set<std::vector<std::string>> unique;
  size_t total = 0;
  for (const auto& text : texts) {
    if (text.size() < n) continue;
    for (size_t i = 0; i + n <= text.size(); ++i) {
      unique.insert(std::vector<std::string>(text.begin() + static_cast<ptrdiff_t>(i),
                                             text.begin() + static_cast<ptrdiff_t>(i + n)));
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
}

}  // namespace recedit::eval
