#include "recedit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "recedit/checkpoint.hpp"
#include "recedit/optim.hpp"

namespace recedit::gen {

using nlohmann::json;
using nn::Graph;
using nn::Node;

BlacklistTrie BlacklistTrie::build(const ConstraintSpec& spec, const IngredientVocab& vocab,
                                   const WordVocab& words) {
  BlacklistTrie trie;
  for (int ingredient : spec.banned) {
    const VocabEntry& entry = vocab.entry(ingredient);
    std::vector<const std::vector<std::string>*> forms{&entry.canonical};
    for (const auto& alias : entry.aliases) forms.push_back(&alias);
    for (const auto* form : forms) {
      std::vector<int> ids;
      bool in_vocab = true;
      for (const auto& tok : *form) {
        int id = words.id(tok);
        // A surface form with an out-of-vocabulary token can never be
        // generated, so there is nothing to block.
        if (id == words.unk_id() && tok != WordVocab::kUnk) {
          in_vocab = false;
          break;
        }
        ids.push_back(id);
      }
      if (!in_vocab || ids.empty()) continue;
      int node = 0;
      for (int id : ids) {
        auto [it, inserted] = trie.nodes_[static_cast<size_t>(node)].children.try_emplace(
            id, static_cast<int>(trie.nodes_.size()));
        if (inserted) trie.nodes_.emplace_back();
        node = it->second;
      }
      if (!trie.nodes_[static_cast<size_t>(node)].terminal) {
        trie.nodes_[static_cast<size_t>(node)].terminal = true;
        trie.n_sequences_++;
      }
      trie.max_seq_len_ = std::max(trie.max_seq_len_, ids.size());
    }
  }
  return trie;
}

std::set<int> BlacklistTrie::blocked_next(const std::vector<int>& prefix) const {
  std::set<int> blocked;
  if (empty()) return blocked;
  size_t longest_context = max_seq_len_ == 0 ? 0 : max_seq_len_ - 1;
  size_t max_ctx = std::min(longest_context, prefix.size());
  for (size_t ctx = 0; ctx <= max_ctx; ++ctx) {
    int node = 0;
    bool ok = true;
    for (size_t i = prefix.size() - ctx; i < prefix.size(); ++i) {
      auto it = nodes_[static_cast<size_t>(node)].children.find(prefix[i]);
      if (it == nodes_[static_cast<size_t>(node)].children.end()) {
        ok = false;
        break;
      }
      node = it->second;
    }
    if (!ok) continue;
    for (const auto& [tok, child] : nodes_[static_cast<size_t>(node)].children) {
      if (nodes_[static_cast<size_t>(child)].terminal) blocked.insert(tok);
    }
  }
  return blocked;
}

StepDistribution apply_blacklist(StepDistribution dist, const std::vector<int>& decoded_prefix,
                                 const BlacklistTrie& trie) {
  std::set<int> blocked = trie.blocked_next(decoded_prefix);
  if (blocked.empty()) return dist;
  double kept_mass = 0.0;
  for (size_t i = 0; i < dist.p_final.size(); ++i) {
    if (blocked.count(static_cast<int>(i))) {
      dist.p_final[i] = 0.0;
    } else {
      kept_mass += dist.p_final[i];
    }
  }
  if (kept_mass > 0.0) {
    for (double& p : dist.p_final) p /= kept_mass;
  } else {
    size_t n_open = dist.p_final.size() - blocked.size();
    double u = n_open == 0 ? 0.0 : 1.0 / static_cast<double>(n_open);
    for (size_t i = 0; i < dist.p_final.size(); ++i) {
      dist.p_final[i] = blocked.count(static_cast<int>(i)) ? 0.0 : u;
    }
  }
  return dist;
}

std::vector<double> mix_distributions(const std::vector<double>& p_vocab,
                                      const std::vector<double>& alpha,
                                      const std::vector<int>& input_ids, double p_gen) {
  if (alpha.size() != input_ids.size()) {
    throw ValidationError("mix_distributions: alpha/input length mismatch");
  }
  std::vector<double> p_final(p_vocab.size());
  for (size_t w = 0; w < p_vocab.size(); ++w) p_final[w] = p_gen * p_vocab[w];
  for (size_t i = 0; i < input_ids.size(); ++i) {
    p_final[static_cast<size_t>(input_ids[i])] += (1.0 - p_gen) * alpha[i];
  }
  return p_final;
}

StepGenerator::StepGenerator(GeneratorConfig cfg, WordVocab vocab, uint64_t seed)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  params_.config = cfg_.arch;
  Rng rng = Rng::substream(seed, "generator-init");
  int64_t d = cfg_.arch.d_model;
  int64_t de = cfg_.arch.embed_width();
  nn::init_embedding(params_, "embed.tok", vocab_.size(), de, rng);
  if (cfg_.arch.d_embed > 0) nn::init_embedding(params_, "embed.factor", de, d, rng);
  nn::init_embedding(params_, "embed.pos_src", cfg_.max_src_len, d, rng);
  nn::init_embedding(params_, "embed.pos_dec", cfg_.max_tgt_len, d, rng);
  nn::init_encoder_layers(params_, cfg_.arch.n_layers, rng);
  nn::init_decoder_layers(params_, cfg_.arch.n_layers, rng);
  if (cfg_.copy_attention) nn::init_linear(params_, "gen", d, 1, rng);
}

std::vector<int> StepGenerator::encode_ingredients(const std::vector<std::string>& names) const {
  std::vector<int> ids;
  bool any_word = false;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) ids.push_back(vocab_.comma_id());
    for (const auto& tok : word_tokenize(names[i])) {
      ids.push_back(vocab_.id(tok));
      any_word = true;
    }
  }
  if (!any_word) throw ValidationError("encode_ingredients: no ingredient tokens");
  if (static_cast<int>(ids.size()) > cfg_.max_src_len) {
    ids.resize(static_cast<size_t>(cfg_.max_src_len));
  }
  return ids;
}

std::vector<int> StepGenerator::encode_steps(const std::vector<std::string>& steps) const {
  std::vector<int> ids;
  for (size_t s = 0; s < steps.size(); ++s) {
    if (s) ids.push_back(vocab_.stepsep_id());
    for (const auto& tok : word_tokenize(steps[s])) ids.push_back(vocab_.id(tok));
  }
  ids.push_back(vocab_.eot_id());
  if (static_cast<int>(ids.size()) > cfg_.max_tgt_len - 1) {
    ids.resize(static_cast<size_t>(cfg_.max_tgt_len - 1));
    ids.back() = vocab_.eot_id();
  }
  return ids;
}

std::vector<std::string> StepGenerator::decode_steps(const std::vector<int>& tokens) const {
  std::vector<std::string> steps;
  std::vector<std::string> current;
  for (int id : tokens) {
    if (id == vocab_.eot_id()) break;
    if (id == vocab_.stepsep_id()) {
      if (!current.empty()) steps.push_back(detokenize(current));
      current.clear();
      continue;
    }
    current.push_back(vocab_.token(id));
  }
  if (!current.empty()) steps.push_back(detokenize(current));
  return steps;
}

StepGenerator::ForwardParts StepGenerator::forward(Graph& g, const std::vector<int>& input_ids,
                                                   const std::vector<int>& decoder_input_ids) {
  if (input_ids.empty()) throw ValidationError("generator forward: empty ingredient input");
  if (static_cast<int>(input_ids.size()) > cfg_.max_src_len ||
      static_cast<int>(decoder_input_ids.size()) > cfg_.max_tgt_len) {
    throw ValidationError("generator forward: sequence exceeds configured maximum");
  }

  Node* tok_table = g.param(params_.at("embed.tok"));
  Node* factor = cfg_.arch.d_embed > 0 ? g.param(params_.at("embed.factor")) : nullptr;

  // Raw input token embeddings double as the copy-attention keys.
  Node* src_embed = nn::embed(g, input_ids, tok_table, factor);

  std::vector<int> src_pos(input_ids.size());
  for (size_t i = 0; i < src_pos.size(); ++i) src_pos[i] = static_cast<int>(i);
  Node* enc_x = g.add(src_embed, g.rows_lookup(g.param(params_.at("embed.pos_src")), src_pos));
  Node* enc = nn::transformer_encoder(g, params_, enc_x, cfg_.arch.n_layers);

  std::vector<int> dec_pos(decoder_input_ids.size());
  for (size_t i = 0; i < dec_pos.size(); ++i) dec_pos[i] = static_cast<int>(i);
  Node* dec_x = g.add(nn::embed(g, decoder_input_ids, tok_table, factor),
                      g.rows_lookup(g.param(params_.at("embed.pos_dec")), dec_pos));
  Node* h = nn::transformer_decoder(g, params_, dec_x, enc, cfg_.arch.n_layers, true);

  // Output projection tied to the input embeddings.
  Node* w_tied = factor ? g.matmul(tok_table, factor) : tok_table;
  ForwardParts parts;
  parts.p_vocab = g.softmax_rows(g.matmul(h, g.transpose(w_tied)));

  if (!cfg_.copy_attention) {
    parts.p_final = parts.p_vocab;
    return parts;
  }

  // Copy attention over the input embeddings, scaled by sqrt(K_ingr).
  // Comma positions are masked out so copy mass lands on real words only.
  double divisor = std::sqrt(static_cast<double>(input_ids.size()));
  Node* scores = g.affine(g.matmul(h, g.transpose(src_embed)), 1.0 / divisor, 0.0);
  std::vector<double> comma_mask(input_ids.size(), 0.0);
  bool any_masked = false;
  for (size_t i = 0; i < input_ids.size(); ++i) {
    if (input_ids[i] == vocab_.comma_id()) {
      comma_mask[i] = -std::numeric_limits<double>::infinity();
      any_masked = true;
    }
  }
  if (any_masked) {
    scores = g.add_row_broadcast(scores,
                                 g.constant({1, static_cast<int64_t>(input_ids.size())},
                                            std::move(comma_mask)));
  }
  parts.alpha = g.softmax_rows(scores);

  parts.p_gen = g.sigmoid(g.add_row_broadcast(g.matmul(h, g.param(params_.at("gen.w"))),
                                              g.param(params_.at("gen.b"))));

  Node* gen_part = g.scale_rows(parts.p_vocab, parts.p_gen);
  Node* copy_part = g.scatter_cols(g.scale_rows(parts.alpha, g.affine(parts.p_gen, -1.0, 1.0)),
                                   input_ids, vocab_.size());
  parts.p_final = g.add(gen_part, copy_part);
  return parts;
}

nn::Node* StepGenerator::lm_loss(Graph& g, const std::vector<int>& input_ids,
                                 const std::vector<int>& target_ids, long* n_clamped) {
  if (target_ids.empty()) throw ValidationError("lm_loss: empty target");
  std::vector<int> dec_input;
  dec_input.reserve(target_ids.size());
  dec_input.push_back(vocab_.bos_id());
  dec_input.insert(dec_input.end(), target_ids.begin(), target_ids.end() - 1);

  ForwardParts parts = forward(g, input_ids, dec_input);
  Node* gold = g.pick_per_row(parts.p_final, target_ids);
  return g.affine(g.mean_all(g.log_floor(gold, 1e-12, n_clamped)), -1.0, 0.0);
}

StepDistribution StepGenerator::step_distribution(const std::vector<int>& input_ids,
                                                  const std::vector<int>& prefix) {
  std::vector<int> dec_input;
  dec_input.reserve(prefix.size() + 1);
  dec_input.push_back(vocab_.bos_id());
  dec_input.insert(dec_input.end(), prefix.begin(), prefix.end());

  Graph g;
  ForwardParts parts = forward(g, input_ids, dec_input);
  int64_t last = parts.p_final->rows() - 1;
  int64_t v = parts.p_final->cols();

  StepDistribution dist;
  dist.p_final.assign(parts.p_final->val.begin() + last * v,
                      parts.p_final->val.begin() + (last + 1) * v);
  dist.p_vocab.assign(parts.p_vocab->val.begin() + last * v,
                      parts.p_vocab->val.begin() + (last + 1) * v);
  if (parts.alpha) {
    int64_t k = parts.alpha->cols();
    dist.alpha.assign(parts.alpha->val.begin() + last * k,
                      parts.alpha->val.begin() + (last + 1) * k);
    dist.p_gen = parts.p_gen->val[static_cast<size_t>(last)];
  } else {
    dist.alpha.clear();
    dist.p_gen = 1.0;
  }
  return dist;
}

StepGenerator::GenerateResult StepGenerator::generate(const std::vector<int>& input_ids,
                                                      const BlacklistTrie* blacklist,
                                                      int max_len) {
  GenerateResult result;
  for (int step = 0; step < max_len; ++step) {
    StepDistribution dist = step_distribution(input_ids, result.tokens);
    if (blacklist) dist = apply_blacklist(std::move(dist), result.tokens, *blacklist);
    int best = 0;
    for (size_t i = 1; i < dist.p_final.size(); ++i) {
      if (dist.p_final[i] > dist.p_final[static_cast<size_t>(best)]) best = static_cast<int>(i);
    }
    if (best == vocab_.eot_id()) return result;
    result.tokens.push_back(best);
    if (static_cast<int>(result.tokens.size()) + 1 >= cfg_.max_tgt_len) break;
  }
  result.truncated = true;
  return result;
}

double StepGenerator::next_token_accuracy(const std::vector<int>& input_ids,
                                          const std::vector<int>& target_ids) {
  std::vector<int> dec_input;
  dec_input.push_back(vocab_.bos_id());
  dec_input.insert(dec_input.end(), target_ids.begin(), target_ids.end() - 1);
  Graph g;
  ForwardParts parts = forward(g, input_ids, dec_input);
  int64_t v = parts.p_final->cols();
  size_t hits = 0;
  for (size_t i = 0; i < target_ids.size(); ++i) {
    const double* row = parts.p_final->val.data() + static_cast<int64_t>(i) * v;
    int best = 0;
    for (int64_t j = 1; j < v; ++j) {
      if (row[j] > row[best]) best = static_cast<int>(j);
    }
    if (best == target_ids[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(target_ids.size());
}

namespace {

constexpr const char* kGeneratorKind = "step-generator";

}  // namespace

void StepGenerator::save(const std::string& path) const {
  json meta{
      {"kind", kGeneratorKind},
      {"arch",
       {{"n_layers", cfg_.arch.n_layers},
        {"d_model", cfg_.arch.d_model},
        {"n_heads", cfg_.arch.n_heads},
        {"d_ff", cfg_.arch.d_ff},
        {"d_embed", cfg_.arch.d_embed}}},
      {"max_src_len", cfg_.max_src_len},
      {"max_tgt_len", cfg_.max_tgt_len},
      {"copy_attention", cfg_.copy_attention},
      {"vocab", vocab_.to_json()},
      {"trained", trained_},
  };
  nn::save_checkpoint(path, params_, meta.dump());
}

StepGenerator StepGenerator::load(const std::string& path) {
  nn::ParameterStore store;
  json meta = json::parse(nn::load_checkpoint(path, store));
  if (meta.value("kind", "") != kGeneratorKind) {
    throw ValidationError(path + ": not a step-generator checkpoint");
  }
  GeneratorConfig cfg;
  cfg.arch.n_layers = meta.at("arch").at("n_layers").get<int>();
  cfg.arch.d_model = meta.at("arch").at("d_model").get<int>();
  cfg.arch.n_heads = meta.at("arch").at("n_heads").get<int>();
  cfg.arch.d_ff = meta.at("arch").at("d_ff").get<int>();
  cfg.arch.d_embed = meta.at("arch").at("d_embed").get<int>();
  cfg.max_src_len = meta.at("max_src_len").get<int>();
  cfg.max_tgt_len = meta.at("max_tgt_len").get<int>();
  cfg.copy_attention = meta.at("copy_attention").get<bool>();

  StepGenerator model(cfg, WordVocab::from_json(meta.at("vocab")), 0);
  model.params_ = std::move(store);
  model.params_.config = cfg.arch;
  if (meta.value("trained", false)) model.mark_trained();
  return model;
}

GeneratorTrainHistory train_generator(StepGenerator& model,
                                      const std::vector<GeneratorExample>& train,
                                      const GeneratorTrainOptions& options, uint64_t seed) {
  if (train.empty()) throw ValidationError("train_generator: no training examples");

  GeneratorTrainHistory history;
  nn::LambOptions lamb;
  lamb.learning_rate = options.learning_rate;
  nn::OptimizerState opt = nn::make_optimizer_state(model.params(), lamb);
  Rng shuffle_rng = Rng::substream(seed, "generator-shuffle");

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t in_batch = 0;
    model.params().zero_grads();
    for (size_t step = 0; step < order.size(); ++step) {
      const GeneratorExample& ex = train[order[step]];
      Graph g;
      Node* loss = model.lm_loss(g, ex.input_ids, ex.target_ids, &history.n_clamped);
      double value = loss->scalar();
      if (!std::isfinite(value)) {
        history.diverged = true;
        return history;
      }
      epoch_loss += value;
      g.backward(loss);
      if (++in_batch == static_cast<size_t>(options.batch_size) || step + 1 == order.size()) {
        nn::lamb_step(model.params(), opt);
        model.params().zero_grads();
        in_batch = 0;
      }
    }
    epoch_loss /= static_cast<double>(train.size());
    history.train_loss.push_back(epoch_loss);
    if (options.on_epoch) options.on_epoch(epoch, epoch_loss);
  }
  model.mark_trained();
  return history;
}

}  // namespace recedit::gen
