#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "recedit/action_tree.hpp"
#include "recedit/corpus.hpp"
#include "recedit/metrics.hpp"

namespace recedit::eval {

// One edited recipe as produced by the pipeline (or any system under
// evaluation): predicted ingredient namesplus generated step text.
struct SystemOutput {
  std::string base_id;
  ConstraintId constraint = ConstraintId::kLowCarb;
  std::vector<std::string> ingredient_names;
  std::vector<std::string> steps;
  bool truncated = false;
  bool blacklist_active = false;
};

std::vector<SystemOutput> load_outputs(const std::string& path);
void save_outputs(const std::vector<SystemOutput>& outputs, const std::string& path);

struct MetricReport {
  double iou = 0.0;
  double f1 = 0.0;
  double ins_f1 = 0.0;
  double ins_precision = 0.0;
  double del_f1 = 0.0;
  double del_precision = 0.0;
  double rouge_l = 0.0;
  double nted = 0.0;
  double distinct2 = 0.0;
  double list_violation_rate = 0.0;
  double step_violation_rate = 0.0;
  size_t n_pairs = 0;
  size_t n_missing = 0;
  size_t n_hard = 0;  // outputs under hard constraints (violation denominators)
};

nlohmann::json report_to_json(const MetricReport& report);

struct EvalResult {
  MetricReport overall;
  std::map<ConstraintId, MetricReport> per_constraint;
};

nlohmann::json result_to_json(const EvalResult& result);

struct ViolationRates {
  double list_rate = 0.0;
  double step_rate = 0.0;
  size_t n = 0;
};

// Fraction of recipes with at least one list / step violation. Hard
// constraints only; entries under soft constraints are skipped.
std::map<ConstraintId, ViolationRates> violation_rates(
    const std::vector<SystemOutput>& outputs,
    const std::map<ConstraintId, ConstraintSpec>& specs, const IngredientVocab& vocab);

// Per-pair metric means plus corpus-level diversity, overall and broken
// down by constraint. Pairs with no matching output count as failures:
// zero fidelity scores, NTED 1, and a `n_missing` tick.
EvalResult evaluate_pairs(const std::vector<SystemOutput>& outputs,
                          const std::vector<RecipePair>& pairs,
                          const std::map<std::string, Recipe>& recipes_by_id,
                          const IngredientVocab& vocab,
                          const std::map<ConstraintId, ConstraintSpec>& specs,
                          const std::set<std::string>& verb_lexicon);

}  // namespace recedit::eval
