#include "recedit/constraints.hpp"

namespace recedit {

namespace {
constexpr std::string_view kNames[kNumConstraints] = {
    "low-carb", "low-calorie", "low-fat", "low-sugar", "vegetarian", "gluten-free", "dairy-free",
};
}

std::string_view constraint_name(ConstraintId id) {
  return kNames[static_cast<int>(id)];
}

std::optional<ConstraintId> parse_constraint(std::string_view name) {
  for (int i = 0; i < kNumConstraints; ++i) {
    if (kNames[i] == name) return static_cast<ConstraintId>(i);
  }
  return std::nullopt;
}

ConstraintId parse_constraint_or_throw(std::string_view name) {
  auto id = parse_constraint(name);
  if (!id) throw ValidationError("unknown constraint: " + std::string(name));
  return *id;
}

bool constraint_is_hard(ConstraintId id) {
  switch (id) {
    case ConstraintId::kVegetarian:
    case ConstraintId::kGlutenFree:
    case ConstraintId::kDairyFree:
      return true;
    default:
      return false;
  }
}

const std::vector<ConstraintId>& all_constraints() {
  static const std::vector<ConstraintId> all = {
      ConstraintId::kLowCarb,    ConstraintId::kLowCalorie, ConstraintId::kLowFat,
      ConstraintId::kLowSugar,   ConstraintId::kVegetarian, ConstraintId::kGlutenFree,
      ConstraintId::kDairyFree,
  };
  return all;
}

}  // namespace recedit
