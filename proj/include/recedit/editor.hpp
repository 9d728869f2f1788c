#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "recedit/corpus.hpp"
#include "recedit/gradcheck.hpp"
#include "recedit/graph.hpp"
#include "recedit/rng.hpp"
#include "recedit/tokenizer.hpp"
#include "recedit/transformer.hpp"

namespace recedit::editor {

struct EditorConfig {
  nn::ModelConfig arch;
  int margin = 8;        // decoder slots beyond the base ingredient count
  int max_enc_len = 40;  // constraint token + name tokens
  int max_dec_len = 64;  // upper bound on scoring positions
};

struct EditorInput {
  ConstraintId constraint = ConstraintId::kLowCarb;
  std::vector<std::string> name_tokens;
  std::vector<int> base_ingredient_ids;  // order preserved as given
};

struct EditorExample {
  EditorInput input;
  std::set<int> target_ids;
};

struct EditorPrediction {
  std::vector<double> pooled_probs;  // one per ingredient id
  std::vector<double> eos_probs;     // one per decoder position
  int k_predicted = 0;
  std::set<int> selected;
};

// Columnwise max over positions, eos column excluded. `logits` is the
// row-major [t x (n_ingredients+1)] score matrix.
std::vector<double> pool_scores(const std::vector<double>& logits, int64_t t,
                                int64_t n_ingredients);

std::vector<double> sigmoid_all(const std::vector<double>& v);

// Bernoulli scan over the per-position eos probabilities: K is the index
// of the first success, or T when none fires.
int predict_cardinality(const std::vector<double>& eos_logits, Rng& rng);
// Deterministic analogue used for evaluation: first position whose eos
// probability crosses 0.5, else T.
int deterministic_cardinality(const std::vector<double>& eos_probs);

// K highest probabilities; ties break toward the lower ingredient id.
std::set<int> select_top_k(const std::vector<double>& pooled_probs, int k);

// Encoder over [constraint; name], full (non-causal) decoder over the base
// ingredient ids with no positional signal, so pooled scores cannot depend
// on ingredient order. The eos column alone carries a learned per-position
// bias; without it every padding slot would score eos identically and the
// cardinality target would be unlearnable.
class IngredientEditor {
 public:
  IngredientEditor(EditorConfig cfg, WordVocab name_vocab, int n_ingredients, uint64_t seed);

  static IngredientEditor load(const std::string& path);
  void save(const std::string& path) const;

  const EditorConfig& config() const { return cfg_; }
  int n_ingredients() const { return n_ingredients_; }
  const WordVocab& name_vocab() const { return name_vocab_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  // [n_positions x (n_ingredients+1)] logits; last column is eos.
  nn::Node* score_positions(nn::Graph& g, const EditorInput& input, int n_positions);

  // Pooled-membership BCE plus the cardinality BCE on the eos column.
  nn::Node* loss(nn::Graph& g, const EditorInput& input, const std::set<int>& target_ids,
                 int k_true, int n_positions);

  int default_positions(const EditorInput& input) const {
    return std::min(static_cast<int>(input.base_ingredient_ids.size()) + cfg_.margin,
                    cfg_.max_dec_len);
  }

  // Full score -> pool -> K -> top-k pass. Sampling uses `rng`; pass null
  // for the deterministic eval mode.
  EditorPrediction predict(const EditorInput& input, Rng* rng = nullptr, int n_positions = -1);

 private:
  std::vector<int> encoder_ids(const EditorInput& input) const;

  EditorConfig cfg_;
  WordVocab name_vocab_;
  int n_ingredients_ = 0;
  bool trained_ = false;
  nn::ParameterStore params_;
};

struct EditorTrainOptions {
  int epochs = 100;
  double learning_rate = 1e-2;
  int batch_size = 8;
  int patience = 0;  // epochs without val-F1 improvement before stopping; 0 disables
  double min_delta = 1e-4;
  std::function<void(int epoch, double train_loss, double val_f1)> on_epoch;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_metric;
  bool diverged = false;
  int best_epoch = -1;
};

TrainHistory train_editor(IngredientEditor& model, const std::vector<EditorExample>& train,
                          const std::vector<EditorExample>& val, const EditorTrainOptions& options,
                          uint64_t seed);

// Mean set-F1 of deterministic predictions against targets.
double editor_set_f1(IngredientEditor& model, const std::vector<EditorExample>& examples);

EditorExample make_editor_example(const Recipe& base, const Recipe& target, ConstraintId constraint);

struct EditOptions {
  bool hard_filter = false;
  Rng* rng = nullptr;  // null = deterministic cardinality
};

// Prediction for one base recipe; applies the banned-ingredient filter
// afterward when requested.
EditorPrediction edit_ingredients(IngredientEditor& model, const Recipe& base,
                                  const ConstraintSpec& spec, const EditOptions& options);

}  // namespace recedit::editor
