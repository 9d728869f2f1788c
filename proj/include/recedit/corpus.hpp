#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "recedit/constraints.hpp"

namespace recedit {

// A recipe as it appears in the corpus file, ingredients still raw text.
struct RawRecipe {
  std::string id;
  std::string name;
  std::vector<std::string> ingredients;
  std::vector<std::string> steps;
  std::vector<std::string> tags;
};

// A recipe resolved against an ingredient vocabulary.
struct Recipe {
  std::string recipe_id;
  std::vector<std::string> name_tokens;
  std::set<int> ingredient_ids;
  std::vector<std::string> steps_text;
  std::set<std::string> raw_tags;
};

struct RecipePair {
  std::string base_id;
  std::string target_id;
  ConstraintId constraint = ConstraintId::kLowCarb;
};

struct VocabEntry {
  int id = -1;
  std::vector<std::string> canonical;
  std::vector<std::vector<std::string>> aliases;
};

// Closed ingredient label space. Ids are dense 0..N-1, assigned by sorted
// canonical name so two runs over the same corpus agree exactly.
class IngredientVocab {
 public:
  IngredientVocab() = default;
  IngredientVocab(std::vector<VocabEntry> entries, int min_recipe_count);

  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const VocabEntry& entry(int id) const { return entries_.at(static_cast<size_t>(id)); }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  int min_recipe_count() const { return min_recipe_count_; }

  // Joined canonical name, e.g. "soy sauce".
  std::string name(int id) const;

  // Looks a token sequence up among canonical names and aliases.
  std::optional<int> find(const std::vector<std::string>& tokens) const;
  std::optional<int> find_name(std::string_view joined_name) const;

  void save(const std::string& path) const;
  static IngredientVocab load(const std::string& path);

 private:
  void rebuild_index();

  std::vector<VocabEntry> entries_;
  std::map<std::vector<std::string>, int> index_;
  int min_recipe_count_ = 1;
};

struct NormalizerConfig {
  std::set<std::string> units;   // units and number words, one lexicon
  std::set<std::string> brands;  // brand-token stoplist
};

NormalizerConfig load_normalizer_config(const std::string& units_path,
                                        const std::string& brands_path);

// alias tokens (joined) -> canonical tokens (joined), from a two-column TSV.
using AliasMap = std::map<std::string, std::string>;
AliasMap load_alias_map(const std::string& path);

// Lowercases, strips brand tokens anywhere, then strips leading
// quantity/unit tokens. Empty output means "drop this line".
std::vector<std::string> normalize_ingredient(std::string_view raw,
                                              const NormalizerConfig& cfg);

IngredientVocab build_vocab(const std::vector<RawRecipe>& corpus, int min_recipe_count,
                            const NormalizerConfig& cfg, const AliasMap& aliases = {});

// Resolves raw recipes against the vocab; recipes that end up with no
// known ingredients, no steps or no name tokens are dropped.
std::vector<Recipe> resolve_recipes(const std::vector<RawRecipe>& corpus,
                                    const IngredientVocab& vocab, const NormalizerConfig& cfg,
                                    size_t* n_dropped = nullptr);

bool satisfies(const Recipe& recipe, const ConstraintSpec& spec);

// True when `needle` occurs as a contiguous token run inside `haystack`.
bool contains_token_run(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle);

double jaccard(const std::set<int>& a, const std::set<int>& b);

std::vector<RecipePair> pair_recipes(const std::vector<Recipe>& corpus,
                                     const ConstraintSpec& spec, double overlap_min);

struct DatasetSplit {
  std::vector<RecipePair> train;
  std::vector<RecipePair> val;
  std::vector<RecipePair> test;
  size_t n_dropped = 0;  // train pairs removed to keep eval recipes unseen
};

DatasetSplit split_dataset(const std::vector<RecipePair>& pairs, uint64_t seed, size_t n_val,
                           size_t n_test);

std::vector<RawRecipe> load_corpus(const std::string& path);
void save_corpus(const std::vector<RawRecipe>& corpus, const std::string& path);
std::vector<RecipePair> load_pairs(const std::string& path);
void save_pairs(const std::vector<RecipePair>& pairs, const std::string& path);

}  // namespace recedit
