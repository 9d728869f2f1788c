#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace recedit {

// Raised for malformed inputs and configuration; the CLI maps it to exit
// code 1 (anything else that escapes is a runtime failure, exit code 2).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ConstraintId {
  kLowCarb = 0,
  kLowCalorie,
  kLowFat,
  kLowSugar,
  kVegetarian,
  kGlutenFree,
  kDairyFree,
};

inline constexpr int kNumConstraints = 7;

std::string_view constraint_name(ConstraintId id);
std::optional<ConstraintId> parse_constraint(std::string_view name);
ConstraintId parse_constraint_or_throw(std::string_view name);

// Hard constraints carry a banned-ingredient list; soft ones are tag-only.
bool constraint_is_hard(ConstraintId id);

const std::vector<ConstraintId>& all_constraints();

struct SubstitutionRule {
  ConstraintId constraint;
  int from_ingredient = -1;
  std::optional<int> to_ingredient;  // absent = removal-only rule
};

struct ConstraintSpec {
  ConstraintId id = ConstraintId::kLowCarb;
  bool hard = false;
  std::set<int> banned;  // ingredient ids; empty for soft constraints
  std::vector<SubstitutionRule> rules;
};

}  // namespace recedit
