#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "recedit/corpus.hpp"
#include "recedit/graph.hpp"
#include "recedit/rng.hpp"
#include "recedit/tokenizer.hpp"
#include "recedit/transformer.hpp"

namespace recedit::gen {

struct GeneratorConfig {
  nn::ModelConfig arch;
  int max_src_len = 64;
  int max_tgt_len = 257;  // bos + generated tokens
  bool copy_attention = true;
};

// Output distribution at one decode position. p_vocab, alpha and p_final
// each sum to 1; comma input positions carry zero copy weight.
struct StepDistribution {
  std::vector<double> p_vocab;
  std::vector<double> alpha;
  double p_gen = 1.0;
  std::vector<double> p_final;
};

// Token-sequence trie over the surface forms (canonical names plus
// aliases) of the banned ingredients of one hard constraint.
class BlacklistTrie {
 public:
  static BlacklistTrie build(const ConstraintSpec& spec, const IngredientVocab& vocab,
                             const WordVocab& words);

  bool empty() const { return nodes_.size() <= 1; }
  size_t n_sequences() const { return n_sequences_; }

  // Token ids that would complete (or, alone, constitute) a banned
  // sequence if emitted after `prefix`.
  std::set<int> blocked_next(const std::vector<int>& prefix) const;

 private:
  struct TrieNode {
    std::map<int, int> children;
    bool terminal = false;
  };
  std::vector<TrieNode> nodes_{1};
  size_t max_seq_len_ = 0;
  size_t n_sequences_ = 0;
};

// Zeroes blocked tokens out of p_final and renormalizes; if nothing
// survives, falls back to uniform over non-blocked tokens.
StepDistribution apply_blacklist(StepDistribution dist, const std::vector<int>& decoded_prefix,
                                 const BlacklistTrie& trie);

// Mixes the vocabulary distribution with copy weights scattered onto the
// input tokens' vocabulary ids (Eq. 5 shape): p_gen*p_vocab +
// (1-p_gen)*sum of alpha over positions holding each word.
std::vector<double> mix_distributions(const std::vector<double>& p_vocab,
                                      const std::vector<double>& alpha,
                                      const std::vector<int>& input_ids, double p_gen);

// Conditional LM over direction text given an ingredient-name token
// sequence, with copy attention over the input token embeddings and a
// learned generate-vs-copy gate.
class StepGenerator {
 public:
  StepGenerator(GeneratorConfig cfg, WordVocab vocab, uint64_t seed);

  static StepGenerator load(const std::string& path);
  void save(const std::string& path) const;

  const GeneratorConfig& config() const { return cfg_; }
  const WordVocab& vocab() const { return vocab_; }
  nn::ParameterStore& params() { return params_; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  // Ingredient names joined by the comma token.
  std::vector<int> encode_ingredients(const std::vector<std::string>& names) const;
  // Steps joined by the step separator, <eot> appended.
  std::vector<int> encode_steps(const std::vector<std::string>& steps) const;
  std::vector<std::string> decode_steps(const std::vector<int>& tokens) const;

  // Teacher-forced mean negative log p_final over the target sequence.
  // Gold probabilities below 1e-12 are clamped and counted in *n_clamped.
  nn::Node* lm_loss(nn::Graph& g, const std::vector<int>& input_ids,
                    const std::vector<int>& target_ids, long* n_clamped = nullptr);

  // Distribution for the next token after `prefix` (without <bos>).
  StepDistribution step_distribution(const std::vector<int>& input_ids,
                                     const std::vector<int>& prefix);

  struct GenerateResult {
    std::vector<int> tokens;  // without <bos>/<eot>
    bool truncated = false;
  };
  GenerateResult generate(const std::vector<int>& input_ids, const BlacklistTrie* blacklist,
                          int max_len);

  // Fraction of gold positions where the argmax of p_final is the gold
  // token (teacher forcing).
  double next_token_accuracy(const std::vector<int>& input_ids,
                             const std::vector<int>& target_ids);

 private:
  // Shared forward: p_final rows for every decode position of
  // [bos]+targets. Exposes the pieces the public surface needs.
  struct ForwardParts {
    nn::Node* p_vocab = nullptr;   // [T x V]
    nn::Node* alpha = nullptr;     // [T x K], null when copy disabled
    nn::Node* p_gen = nullptr;     // [T x 1], null when copy disabled
    nn::Node* p_final = nullptr;   // [T x V]
  };
  ForwardParts forward(nn::Graph& g, const std::vector<int>& input_ids,
                       const std::vector<int>& decoder_input_ids);

  GeneratorConfig cfg_;
  WordVocab vocab_;
  bool trained_ = false;
  nn::ParameterStore params_;
};

struct GeneratorExample {
  std::vector<int> input_ids;
  std::vector<int> target_ids;
};

struct GeneratorTrainOptions {
  int epochs = 30;
  double learning_rate = 1e-2;
  int batch_size = 8;
  std::function<void(int epoch, double train_loss)> on_epoch;
};

struct GeneratorTrainHistory {
  std::vector<double> train_loss;
  bool diverged = false;
  long n_clamped = 0;
};

GeneratorTrainHistory train_generator(StepGenerator& model,
                                      const std::vector<GeneratorExample>& train,
                                      const GeneratorTrainOptions& options, uint64_t seed);

}  // namespace recedit::gen
