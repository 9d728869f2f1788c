#include "recedit/rules.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "recedit/text.hpp"

namespace recedit::rules {

namespace fs = std::filesystem;

std::set<int> check_ingredient_list(const std::set<int>& ingredients, const ConstraintSpec& spec) {
  std::set<int> out;
  if (!spec.hard) return out;
  for (int id : ingredients) {
    if (spec.banned.count(id)) out.insert(id);
  }
  return out;
}

std::vector<Mention> extract_mentions(const std::vector<std::string>& tokens,
                                      const IngredientVocab& vocab) {
  // Surface forms grouped by first token, longest first.
  struct Form {
    const std::vector<std::string>* tokens;
    int id;
  };
  std::map<std::string, std::vector<Form>> by_first;
  for (const auto& e : vocab.entries()) {
    by_first[e.canonical.front()].push_back({&e.canonical, e.id});
    for (const auto& a : e.aliases) by_first[a.front()].push_back({&a, e.id});
  }
  for (auto& [_, forms] : by_first) {
    std::stable_sort(forms.begin(), forms.end(),
                     [](const Form& a, const Form& b) { return a.tokens->size() > b.tokens->size(); });
  }

  std::vector<Mention> mentions;
  size_t i = 0;
  while (i < tokens.size()) {
    auto it = by_first.find(tokens[i]);
    bool matched = false;
    if (it != by_first.end()) {
      for (const Form& form : it->second) {
        const auto& seq = *form.tokens;
        if (i + seq.size() > tokens.size()) continue;
        if (std::equal(seq.begin(), seq.end(), tokens.begin() + static_cast<ptrdiff_t>(i))) {
          mentions.push_back({i, seq.size(), form.id});
          i += seq.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) ++i;
  }
  return mentions;
}

std::vector<Mention> extract_mentions(const std::string& step, const IngredientVocab& vocab) {
  return extract_mentions(word_tokenize(step), vocab);
}

std::vector<StepViolation> check_steps(const std::vector<std::string>& steps,
                                       const ConstraintSpec& spec, const IngredientVocab& vocab) {
  std::vector<StepViolation> out;
  if (!spec.hard) return out;
  for (size_t s = 0; s < steps.size(); ++s) {
    for (const Mention& m : extract_mentions(steps[s], vocab)) {
      if (spec.banned.count(m.ingredient_id)) out.push_back({s, m});
    }
  }
  return out;
}

ViolationReport check_recipe(const Recipe& recipe, const ConstraintSpec& spec,
                             const IngredientVocab& vocab) {
  ViolationReport report;
  report.recipe_id = recipe.recipe_id;
  report.constraint = spec.id;
  report.list_violations = check_ingredient_list(recipe.ingredient_ids, spec);
  report.step_violations = check_steps(recipe.steps_text, spec, vocab);
  return report;
}

namespace {

bool is_conjunction(const std::string& tok) {
  return tok == "and" || tok == ",";
}

// Replace (or delete, when `replacement` is empty) mention spans in one
// tokenized step. Deletions also take one adjacent conjunction with them.
std::vector<std::string> rewrite_step(const std::vector<std::string>& tokens,
                                      const std::vector<Mention>& spans,
                                      const std::map<int, std::vector<std::string>>& replacement) {
  std::vector<bool> drop(tokens.size(), false);
  std::map<size_t, const std::vector<std::string>*> insert_at;
  for (const Mention& m : spans) {
    for (size_t i = m.start; i < m.start + m.len; ++i) drop[i] = true;
    auto rep = replacement.find(m.ingredient_id);
    if (rep != replacement.end() && !rep->second.empty()) {
      insert_at[m.start] = &rep->second;
    } else {
      // Removal: clean a dangling "and"/comma next to the hole.
      if (m.start > 0 && is_conjunction(tokens[m.start - 1]) && !drop[m.start - 1]) {
        drop[m.start - 1] = true;
      } else if (m.start + m.len < tokens.size() && is_conjunction(tokens[m.start + m.len])) {
        drop[m.start + m.len] = true;
      }
    }
  }
  std::vector<std::string> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto ins = insert_at.find(i);
    if (ins != insert_at.end()) {
      out.insert(out.end(), ins->second->begin(), ins->second->end());
    }
    if (!drop[i]) out.push_back(tokens[i]);
  }
  return out;
}

}  // namespace

Recipe rule_edit(const Recipe& base, const ConstraintSpec& spec, const IngredientVocab& vocab) {
  std::map<int, std::vector<std::string>> replacement;  // violator -> new name tokens (empty = remove)
  for (const SubstitutionRule& r : spec.rules) {
    replacement[r.from_ingredient] =
        r.to_ingredient ? vocab.entry(*r.to_ingredient).canonical : std::vector<std::string>{};
  }

  std::set<int> violating;
  if (spec.hard) {
    violating = check_ingredient_list(base.ingredient_ids, spec);
  } else {
    // Soft constraints have no banned list; the rule table itself decides
    // which ingredients get rewritten.
    for (int id : base.ingredient_ids) {
      if (replacement.count(id)) violating.insert(id);
    }
  }

  Recipe edited = base;
  for (int id : violating) {
    edited.ingredient_ids.erase(id);
    auto rep = replacement.find(id);
    if (rep != replacement.end() && !rep->second.empty()) {
      if (auto to_id = vocab.find(rep->second)) edited.ingredient_ids.insert(*to_id);
    }
  }

  for (auto& step : edited.steps_text) {
    auto tokens = word_tokenize(step);
    std::vector<Mention> spans;
    for (const Mention& m : extract_mentions(tokens, vocab)) {
      if (violating.count(m.ingredient_id)) spans.push_back(m);
    }
    if (spans.empty()) continue;
    step = detokenize(rewrite_step(tokens, spans, replacement));
  }
  return edited;
}

std::set<int> filter_ingredient_list(const std::set<int>& predicted, const ConstraintSpec& spec) {
  std::set<int> out;
  if (!spec.hard) return predicted;
  for (int id : predicted) {
    if (!spec.banned.count(id)) out.insert(id);
  }
  return out;
}

std::vector<SubstitutionRule> load_rules(const std::string& path, const IngredientVocab& vocab,
                                         const std::map<ConstraintId, std::set<int>>& banned) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<SubstitutionRule> rules;
  std::string line;
  size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ValidationError(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    size_t pos = 0;
    while (true) {
      size_t tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() < 2 || cols.size() > 3) fail("expected constraint<TAB>from[<TAB>to]");

    SubstitutionRule rule;
    auto cid = parse_constraint(cols[0]);
    if (!cid) fail("unknown constraint '" + cols[0] + "'");
    rule.constraint = *cid;

    auto from = vocab.find_name(cols[1]);
    if (!from) fail("unknown ingredient '" + cols[1] + "'");
    rule.from_ingredient = *from;

    if (cols.size() == 3 && !cols[2].empty()) {
      auto to = vocab.find_name(cols[2]);
      if (!to) fail("unknown ingredient '" + cols[2] + "'");
      rule.to_ingredient = *to;
    }

    auto banned_it = banned.find(rule.constraint);
    if (constraint_is_hard(rule.constraint) && banned_it != banned.end()) {
      if (!banned_it->second.count(rule.from_ingredient)) {
        fail("'" + cols[1] + "' is not banned under " + cols[0]);
      }
      if (rule.to_ingredient && banned_it->second.count(*rule.to_ingredient)) {
        fail("substitute '" + cols[2] + "' is banned under " + cols[0]);
      }
    }
    rules.push_back(rule);
  }
  return rules;
}

std::map<ConstraintId, ConstraintSpec> load_constraint_specs(const std::string& dir,
                                                             const IngredientVocab& vocab) {
  std::map<ConstraintId, ConstraintSpec> specs;
  std::map<ConstraintId, std::set<int>> banned;

  for (ConstraintId id : all_constraints()) {
    ConstraintSpec spec;
    spec.id = id;
    spec.hard = constraint_is_hard(id);
    fs::path sub = fs::path(dir) / std::string(constraint_name(id));

    fs::path banned_path = sub / "banned.txt";
    if (spec.hard) {
      if (!fs::exists(banned_path)) {
        throw ValidationError("missing banned list: " + banned_path.string());
      }
      std::ifstream in(banned_path);
      std::string line;
      size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto ing = vocab.find_name(line);
        if (!ing) {
          // Full-scale banned lists cover far more ingredients than any
          // one corpus; names absent from the vocab cannot occur anyway.
          continue;
        }
        spec.banned.insert(*ing);
      }
      if (spec.banned.empty()) {
        throw ValidationError(banned_path.string() + ": no banned ingredient resolves in the vocab");
      }
    }
    banned[id] = spec.banned;
    specs[id] = std::move(spec);
  }

  for (ConstraintId id : all_constraints()) {
    fs::path rules_path = fs::path(dir) / std::string(constraint_name(id)) / "rules.tsv";
    if (!fs::exists(rules_path)) continue;
    for (const SubstitutionRule& r : load_rules(rules_path.string(), vocab, banned)) {
      specs.at(r.constraint).rules.push_back(r);
    }
  }
  return specs;
}

}  // namespace recedit::rules
