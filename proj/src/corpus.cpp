#include "recedit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "recedit/rng.hpp"
#include "recedit/text.hpp"

namespace recedit {

using nlohmann::json;

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

std::set<std::string> load_token_set(const std::string& path) {
  std::set<std::string> out;
  auto in = open_or_throw(path);
  std::string line;
  while (std::getline(in, line)) {
    for (auto& tok : word_tokenize(line)) out.insert(std::move(tok));
  }
  return out;
}

}  // namespace

IngredientVocab::IngredientVocab(std::vector<VocabEntry> entries, int min_recipe_count)
    : entries_(std::move(entries)), min_recipe_count_(min_recipe_count) {
  rebuild_index();
}

void IngredientVocab::rebuild_index() {
  index_.clear();
  for (const auto& e : entries_) {
    index_[e.canonical] = e.id;
    for (const auto& a : e.aliases) index_[a] = e.id;
  }
}

std::string IngredientVocab::name(int id) const {
  return join_tokens(entry(id).canonical);
}

std::optional<int> IngredientVocab::find(const std::vector<std::string>& tokens) const {
  auto it = index_.find(tokens);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> IngredientVocab::find_name(std::string_view joined_name) const {
  return find(word_tokenize(joined_name));
}

void IngredientVocab::save(const std::string& path) const {
  json j;
  j["min_recipe_count"] = min_recipe_count_;
  json entries = json::array();
  for (const auto& e : entries_) {
    json je;
    je["name"] = join_tokens(e.canonical);
    json aliases = json::array();
    for (const auto& a : e.aliases) aliases.push_back(join_tokens(a));
    je["aliases"] = aliases;
    entries.push_back(je);
  }
  j["entries"] = entries;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

IngredientVocab IngredientVocab::load(const std::string& path) {
  auto in = open_or_throw(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  std::vector<VocabEntry> entries;
  int next_id = 0;
  for (const auto& je : j.at("entries")) {
    VocabEntry e;
    e.id = next_id++;
    e.canonical = word_tokenize(je.at("name").get<std::string>());
    for (const auto& a : je.at("aliases")) {
      e.aliases.push_back(word_tokenize(a.get<std::string>()));
    }
    entries.push_back(std::move(e));
  }
  return IngredientVocab(std::move(entries), j.value("min_recipe_count", 1));
}

NormalizerConfig load_normalizer_config(const std::string& units_path,
                                        const std::string& brands_path) {
  NormalizerConfig cfg;
  cfg.units = load_token_set(units_path);
  cfg.brands = load_token_set(brands_path);
  return cfg;
}

AliasMap load_alias_map(const std::string& path) {
  AliasMap map;
  auto in = open_or_throw(path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected canonical<TAB>alias");
    }
    std::string canonical = join_tokens(word_tokenize(line.substr(0, tab)));
    std::string alias = join_tokens(word_tokenize(line.substr(tab + 1)));
    if (canonical.empty() || alias.empty()) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": empty alias entry");
    }
    map[alias] = canonical;
  }
  return map;
}

std::vector<std::string> normalize_ingredient(std::string_view raw, const NormalizerConfig& cfg) {
  std::vector<std::string> tokens = word_tokenize(raw);

  // Brand tokens go first so a brand name cannot shield a unit token
  // from the leading-quantity pass (keeps normalization idempotent).
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (auto& tok : tokens) {
    if (!cfg.brands.count(tok)) kept.push_back(std::move(tok));
  }

  size_t start = 0;
  while (start < kept.size() && (is_number_token(kept[start]) || cfg.units.count(kept[start]))) {
    ++start;
  }
  return std::vector<std::string>(kept.begin() + static_cast<ptrdiff_t>(start), kept.end());
}

IngredientVocab build_vocab(const std::vector<RawRecipe>& corpus, int min_recipe_count,
                            const NormalizerConfig& cfg, const AliasMap& aliases) {
  if (corpus.empty()) throw ValidationError("build_vocab: empty corpus");
  if (min_recipe_count < 1) throw ValidationError("build_vocab: min_recipe_count must be >= 1");

  // Count distinct recipes per canonical form, folding aliases first.
  std::map<std::string, int> recipe_counts;
  std::map<std::string, std::set<std::string>> seen_aliases;
  for (const auto& recipe : corpus) {
    std::set<std::string> in_this_recipe;
    for (const auto& raw : recipe.ingredients) {
      auto tokens = normalize_ingredient(raw, cfg);
      if (tokens.empty()) continue;
      std::string name = join_tokens(tokens);
      auto alias_it = aliases.find(name);
      if (alias_it != aliases.end()) {
        seen_aliases[alias_it->second].insert(name);
        name = alias_it->second;
      }
      in_this_recipe.insert(std::move(name));
    }
    for (const auto& name : in_this_recipe) recipe_counts[name]++;
  }

  std::vector<VocabEntry> entries;
  for (const auto& [name, count] : recipe_counts) {  // std::map: already name-sorted
    if (count < min_recipe_count) continue;
    VocabEntry e;
    e.id = static_cast<int>(entries.size());
    e.canonical = word_tokenize(name);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw ValidationError("build_vocab: no ingredient cleared the threshold");

  // Attach every alias the map knows about, not just the ones observed, so
  // mention extraction can match alias surface forms in step text.
  std::map<std::string, size_t> by_name;
  for (size_t i = 0; i < entries.size(); ++i) by_name[join_tokens(entries[i].canonical)] = i;
  for (const auto& [alias, canonical] : aliases) {
    auto it = by_name.find(canonical);
    if (it != by_name.end()) entries[it->second].aliases.push_back(word_tokenize(alias));
  }
  return IngredientVocab(std::move(entries), min_recipe_count);
}

std::vector<Recipe> resolve_recipes(const std::vector<RawRecipe>& corpus,
                                    const IngredientVocab& vocab, const NormalizerConfig& cfg,
                                    size_t* n_dropped) {
  std::vector<Recipe> out;
  size_t dropped = 0;
  for (const auto& raw : corpus) {
    Recipe r;
    r.recipe_id = raw.id;
    r.name_tokens = word_tokenize(raw.name);
    r.steps_text = raw.steps;
    r.raw_tags.insert(raw.tags.begin(), raw.tags.end());
    for (const auto& line : raw.ingredients) {
      auto tokens = normalize_ingredient(line, cfg);
      if (tokens.empty()) continue;
      if (auto id = vocab.find(tokens)) r.ingredient_ids.insert(*id);
    }
    if (r.name_tokens.empty() || r.steps_text.empty() || r.ingredient_ids.empty()) {
      ++dropped;
      continue;
    }
    out.push_back(std::move(r));
  }
  if (n_dropped) *n_dropped = dropped;
  return out;
}

bool satisfies(const Recipe& recipe, const ConstraintSpec& spec) {
  if (!recipe.raw_tags.count(std::string(constraint_name(spec.id)))) return false;
  if (!spec.hard) return true;
  for (int id : recipe.ingredient_ids) {
    if (spec.banned.count(id)) return false;
  }
  return true;
}

bool contains_token_run(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

double jaccard(const std::set<int>& a, const std::set<int>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  for (int x : a) inter += b.count(x);
  size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<RecipePair> pair_recipes(const std::vector<Recipe>& corpus,
                                     const ConstraintSpec& spec, double overlap_min) {
  std::vector<const Recipe*> bases;
  std::vector<const Recipe*> targets;
  for (const auto& r : corpus) {
    (satisfies(r, spec) ? targets : bases).push_back(&r);
  }
  std::vector<RecipePair> pairs;
  for (const Recipe* base : bases) {
    for (const Recipe* target : targets) {
      if (!contains_token_run(target->name_tokens, base->name_tokens)) continue;
      if (jaccard(base->ingredient_ids, target->ingredient_ids) < overlap_min) continue;
      pairs.push_back({base->recipe_id, target->recipe_id, spec.id});
    }
  }
  return pairs;
}

DatasetSplit split_dataset(const std::vector<RecipePair>& pairs, uint64_t seed, size_t n_val,
                           size_t n_test) {
  if (n_val + n_test >= pairs.size()) {
    throw ValidationError("split_dataset: need more pairs than n_val + n_test");
  }
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::substream(seed, "split");
  rng.shuffle(order);

  DatasetSplit split;
  std::set<size_t> held;
  std::set<std::string> eval_recipes;
  for (size_t i = 0; i < n_test + n_val; ++i) {
    const RecipePair& p = pairs[order[i]];
    (i < n_test ? split.test : split.val).push_back(p);
    held.insert(order[i]);
    eval_recipes.insert(p.base_id);
    eval_recipes.insert(p.target_id);
  }
  // Train keeps input order; pairs touching an eval recipe are dropped so
  // no val/test recipe is ever seen in training.
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (held.count(i)) continue;
    if (eval_recipes.count(pairs[i].base_id) || eval_recipes.count(pairs[i].target_id)) {
      ++split.n_dropped;
      continue;
    }
    split.train.push_back(pairs[i]);
  }
  return split;
}

std::vector<RawRecipe> load_corpus(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<RawRecipe> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      RawRecipe r;
      r.id = j.at("id").get<std::string>();
      r.name = j.at("name").get<std::string>();
      r.ingredients = j.at("ingredients").get<std::vector<std::string>>();
      r.steps = j.at("steps").get<std::vector<std::string>>();
      r.tags = j.value("tags", std::vector<std::string>{});
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_corpus(const std::vector<RawRecipe>& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  for (const auto& r : corpus) {
    json j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["ingredients"] = r.ingredients;
    j["steps"] = r.steps;
    j["tags"] = r.tags;
    out << j.dump() << "\n";
  }
}

std::vector<RecipePair> load_pairs(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<RecipePair> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      RecipePair p;
      p.base_id = j.at("base_id").get<std::string>();
      p.target_id = j.at("target_id").get<std::string>();
      p.constraint = parse_constraint_or_throw(j.at("constraint").get<std::string>());
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_pairs(const std::vector<RecipePair>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  for (const auto& p : pairs) {
    json j;
    j["base_id"] = p.base_id;
    j["target_id"] = p.target_id;
    j["constraint"] = std::string(constraint_name(p.constraint));
    out << j.dump() << "\n";
  }
}

}  // namespace recedit
