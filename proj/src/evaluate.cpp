#include "recedit/evaluate.hpp"

#include <fstream>

#include "recedit/rules.hpp"
#include "recedit/text.hpp"

namespace recedit::eval {

using nlohmann::json;

std::vector<SystemOutput> load_outputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<SystemOutput> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      SystemOutput o;
      o.base_id = j.at("base_id").get<std::string>();
      o.constraint = parse_constraint_or_throw(j.at("constraint").get<std::string>());
      o.ingredient_names = j.at("ingredients").get<std::vector<std::string>>();
      o.steps = j.at("steps").get<std::vector<std::string>>();
      o.truncated = j.value("truncated", false);
      o.blacklist_active = j.value("blacklist_active", false);
      out.push_back(std::move(o));
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_outputs(const std::vector<SystemOutput>& outputs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  for (const auto& o : outputs) {
    json j;
    j["base_id"] = o.base_id;
    j["constraint"] = std::string(constraint_name(o.constraint));
    j["ingredients"] = o.ingredient_names;
    j["steps"] = o.steps;
    j["truncated"] = o.truncated;
    j["blacklist_active"] = o.blacklist_active;
    out << j.dump() << "\n";
  }
}

json report_to_json(const MetricReport& r) {
  return json{
      {"iou", r.iou},
      {"f1", r.f1},
      {"ins_f1", r.ins_f1},
      {"ins_precision", r.ins_precision},
      {"del_f1", r.del_f1},
      {"del_precision", r.del_precision},
      {"rouge_l", r.rouge_l},
      {"nted", r.nted},
      {"distinct2", r.distinct2},
      {"list_violation_rate", r.list_violation_rate},
      {"step_violation_rate", r.step_violation_rate},
      {"n_pairs", r.n_pairs},
      {"n_missing", r.n_missing},
      {"n_hard", r.n_hard},
  };
}

json result_to_json(const EvalResult& result) {
  json per;
  for (const auto& [id, report] : result.per_constraint) {
    per[std::string(constraint_name(id))] = report_to_json(report);
  }
  return json{{"overall", report_to_json(result.overall)}, {"per_constraint", per}};
}

std::map<ConstraintId, ViolationRates> violation_rates(
    const std::vector<SystemOutput>& outputs,
    const std::map<ConstraintId, ConstraintSpec>& specs, const IngredientVocab& vocab) {
  std::map<ConstraintId, ViolationRates> rates;
  std::map<ConstraintId, std::pair<size_t, size_t>> hits;  // list, step
  std::map<ConstraintId, size_t> counts;
  for (const auto& o : outputs) {
    auto spec_it = specs.find(o.constraint);
    if (spec_it == specs.end() || !spec_it->second.hard) continue;
    const ConstraintSpec& spec = spec_it->second;
    std::set<int> ids;
    for (const auto& name : o.ingredient_names) {
      auto id = vocab.find_name(name);
      if (!id) throw ValidationError("violation_rates: unknown ingredient '" + name + "'");
      ids.insert(*id);
    }
    counts[o.constraint]++;
    if (!rules::check_ingredient_list(ids, spec).empty()) hits[o.constraint].first++;
    if (!rules::check_steps(o.steps, spec, vocab).empty()) hits[o.constraint].second++;
  }
  for (const auto& [id, n] : counts) {
    ViolationRates r;
    r.n = n;
    r.list_rate = static_cast<double>(hits[id].first) / static_cast<double>(n);
    r.step_rate = static_cast<double>(hits[id].second) / static_cast<double>(n);
    rates[id] = r;
  }
  return rates;
}

namespace {

struct Accumulator {
  double iou = 0, f1 = 0, ins_f1 = 0, ins_p = 0, del_f1 = 0, del_p = 0, rouge = 0, nted_sum = 0;
  size_t n = 0, missing = 0, hard = 0, list_hits = 0, step_hits = 0;
  std::vector<std::vector<std::string>> texts;

  MetricReport finalize() const {
    MetricReport r;
    r.n_pairs = n;
    r.n_missing = missing;
    r.n_hard = hard;
    if (n > 0) {
      double dn = static_cast<double>(n);
      r.iou = iou / dn;
      r.f1 = f1 / dn;
      r.ins_f1 = ins_f1 / dn;
      r.ins_precision = ins_p / dn;
      r.del_f1 = del_f1 / dn;
      r.del_precision = del_p / dn;
      r.rouge_l = rouge / dn;
      r.nted = nted_sum / dn;
    }
    if (hard > 0) {
      r.list_violation_rate = static_cast<double>(list_hits) / static_cast<double>(hard);
      r.step_violation_rate = static_cast<double>(step_hits) / static_cast<double>(hard);
    }
    r.distinct2 = distinct_n(texts, 2);
    return r;
  }
};

std::vector<std::string> step_tokens(const std::vector<std::string>& steps) {
  std::vector<std::string> tokens;
  for (const auto& s : steps) {
    auto t = word_tokenize(s);
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  return tokens;
}

}  // namespace

EvalResult evaluate_pairs(const std::vector<SystemOutput>& outputs,
                          const std::vector<RecipePair>& pairs,
                          const std::map<std::string, Recipe>& recipes_by_id,
                          const IngredientVocab& vocab,
                          const std::map<ConstraintId, ConstraintSpec>& specs,
                          const std::set<std::string>& verb_lexicon) {
  std::map<std::pair<std::string, int>, const SystemOutput*> by_key;
  for (const auto& o : outputs) {
    by_key[{o.base_id, static_cast<int>(o.constraint)}] = &o;
  }

  Accumulator overall;
  std::map<ConstraintId, Accumulator> per;

  for (const auto& pair : pairs) {
    auto base_it = recipes_by_id.find(pair.base_id);
    auto target_it = recipes_by_id.find(pair.target_id);
    if (base_it == recipes_by_id.end() || target_it == recipes_by_id.end()) {
      throw ValidationError("evaluate_pairs: pair references unknown recipe " + pair.base_id +
                            " / " + pair.target_id);
    }
    const Recipe& base = base_it->second;
    const Recipe& gold = target_it->second;

    auto spec_it = specs.find(pair.constraint);
    if (spec_it == specs.end()) {
      throw ValidationError("evaluate_pairs: no spec for constraint");
    }
    const ConstraintSpec& spec = spec_it->second;

    std::vector<Accumulator*> accs{&overall, &per[pair.constraint]};
    auto out_it = by_key.find({pair.base_id, static_cast<int>(pair.constraint)});
    if (out_it == by_key.end()) {
      // Missing output: scored as a total miss so it cannot inflate means.
      for (auto* acc : accs) {
        acc->n++;
        acc->missing++;
        acc->nted_sum += 1.0;
      }
      continue;
    }
    const SystemOutput& out = *out_it->second;

    std::set<int> pred_ids;
    for (const auto& name : out.ingredient_names) {
      auto id = vocab.find_name(name);
      if (!id) throw ValidationError("evaluate_pairs: unknown ingredient '" + name + "'");
      pred_ids.insert(*id);
    }

    double iou = set_iou(pred_ids, gold.ingredient_ids);
    double f1 = set_f1(pred_ids, gold.ingredient_ids);
    EditMetrics em = edit_metrics(base.ingredient_ids, pred_ids, gold.ingredient_ids);
    double rouge = rouge_l(step_tokens(out.steps), step_tokens(gold.steps_text));

    Recipe predicted;
    predicted.recipe_id = out.base_id;
    predicted.name_tokens = base.name_tokens;
    predicted.ingredient_ids = pred_ids;
    predicted.steps_text = out.steps;
    double tree_dist = nted(build_action_tree(predicted, verb_lexicon, vocab),
                            build_action_tree(gold, verb_lexicon, vocab));

    bool list_violation = false;
    bool step_violation = false;
    if (spec.hard) {
      list_violation = !rules::check_ingredient_list(pred_ids, spec).empty();
      step_violation = !rules::check_steps(out.steps, spec, vocab).empty();
    }

    for (auto* acc : accs) {
      acc->n++;
      acc->iou += iou;
      acc->f1 += f1;
      acc->ins_f1 += em.insertion.f1;
      acc->ins_p += em.insertion.precision;
      acc->del_f1 += em.deletion.f1;
      acc->del_p += em.deletion.precision;
      acc->rouge += rouge;
      acc->nted_sum += tree_dist;
      acc->texts.push_back(step_tokens(out.steps));
      if (spec.hard) {
        acc->hard++;
        if (list_violation) acc->list_hits++;
        if (step_violation) acc->step_hits++;
      }
    }
  }

  EvalResult result;
  result.overall = overall.finalize();
  for (const auto& [id, acc] : per) result.per_constraint[id] = acc.finalize();
  return result;
}

}  // namespace recedit::eval
