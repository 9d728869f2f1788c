#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "recedit/corpus.hpp"

namespace recedit::rules {

struct Mention {
  size_t start = 0;  // token index into the tokenized step
  size_t len = 0;
  int ingredient_id = -1;
};

struct StepViolation {
  size_t step_index = 0;
  Mention mention;
};

struct ViolationReport {
  std::string recipe_id;
  ConstraintId constraint = ConstraintId::kLowCarb;
  std::set<int> list_violations;
  std::vector<StepViolation> step_violations;

  bool clean() const { return list_violations.empty() && step_violations.empty(); }
};

// Banned ingredients present in an ingredient-id set. Soft constraints
// have nothing banned, so the result is empty by construction.
std::set<int> check_ingredient_list(const std::set<int>& ingredients, const ConstraintSpec& spec);

// Greedy longest-match scan over canonical names and aliases, left to
// right, non-overlapping spans.
std::vector<Mention> extract_mentions(const std::string& step, const IngredientVocab& vocab);
std::vector<Mention> extract_mentions(const std::vector<std::string>& tokens,
                                      const IngredientVocab& vocab);

std::vector<StepViolation> check_steps(const std::vector<std::string>& steps,
                                       const ConstraintSpec& spec, const IngredientVocab& vocab);

ViolationReport check_recipe(const Recipe& recipe, const ConstraintSpec& spec,
                             const IngredientVocab& vocab);

// The substitution baseline: swaps every violating ingredient that has a
// rule (in the list and in step text) and removes the rest outright,
// cleaning up dangling conjunctions around deleted mentions.
Recipe rule_edit(const Recipe& base, const ConstraintSpec& spec, const IngredientVocab& vocab);

std::set<int> filter_ingredient_list(const std::set<int>& predicted, const ConstraintSpec& spec);

// TSV: constraint <TAB> from_name <TAB> to_name (empty to_name = removal).
// Names must resolve in the vocab; for hard constraints `from` must be
// banned and `to` must not be.
std::vector<SubstitutionRule> load_rules(const std::string& path, const IngredientVocab& vocab,
                                         const std::map<ConstraintId, std::set<int>>& banned);

// Reads banned.txt + rules.tsv per constraint subdirectory.
std::map<ConstraintId, ConstraintSpec> load_constraint_specs(const std::string& dir,
                                                             const IngredientVocab& vocab);

}  // namespace recedit::rules
