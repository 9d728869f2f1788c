#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "recedit/constraints.hpp"

namespace recedit::eval {

// Jaccard and F1 over sets; both are 1 when both sides are empty.
double set_iou(const std::set<int>& pred, const std::set<int>& gold);
double set_f1(const std::set<int>& pred, const std::set<int>& gold);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall/F1 of `pred` against `gold`; an empty denominator
// scores 1 when the opposite side is empty too, else 0.
PrecisionRecallF1 set_prf(const std::set<int>& pred, const std::set<int>& gold);

struct EditMetrics {
  PrecisionRecallF1 insertion;  // pred\base vs gold\base
  PrecisionRecallF1 deletion;   // base\pred vs base\gold
};

EditMetrics edit_metrics(const std::set<int>& base, const std::set<int>& pred,
                         const std::set<int>& gold);

// LCS-based F-measure (beta = 1); 0 when either side is empty.
double rouge_l(const std::vector<std::string>& pred, const std::vector<std::string>& gold);
size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Unique / total n-grams over a corpus of token sequences; n-grams do not
// cross sequence boundaries. 0 when the corpus has no n-grams at all.
double distinct_n(const std::vector<std::vector<std::string>>& texts, size_t n);

}  // namespace recedit::eval
