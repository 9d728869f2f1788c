#include "recedit/editor.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "recedit/checkpoint.hpp"
#include "recedit/optim.hpp"
#include "recedit/rules.hpp"

namespace recedit::editor {

using nlohmann::json;
using nn::Graph;
using nn::Node;

std::vector<double> pool_scores(const std::vector<double>& logits, int64_t t,
                                int64_t n_ingredients) {
  if (t < 1) throw ValidationError("pool_scores: need at least one position");
  int64_t width = n_ingredients + 1;
  if (logits.size() != static_cast<size_t>(t * width)) {
    throw ValidationError("pool_scores: logits do not match t x (n+1)");
  }
  std::vector<double> pooled(static_cast<size_t>(n_ingredients));
  for (int64_t j = 0; j < n_ingredients; ++j) {
    double best = logits[static_cast<size_t>(j)];
    for (int64_t i = 1; i < t; ++i) {
      best = std::max(best, logits[static_cast<size_t>(i * width + j)]);
    }
    pooled[static_cast<size_t>(j)] = best;
  }
  return pooled;
}

std::vector<double> sigmoid_all(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    double z = v[i];
    out[i] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  return out;
}

int predict_cardinality(const std::vector<double>& eos_logits, Rng& rng) {
  auto probs = sigmoid_all(eos_logits);
  for (size_t i = 0; i < probs.size(); ++i) {
    if (rng.bernoulli(probs[i])) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size());
}

int deterministic_cardinality(const std::vector<double>& eos_probs) {
  for (size_t i = 0; i < eos_probs.size(); ++i) {
    if (eos_probs[i] > 0.5) return static_cast<int>(i);
  }
  return static_cast<int>(eos_probs.size());
}

std::set<int> select_top_k(const std::vector<double>& pooled_probs, int k) {
  if (k < 0 || k > static_cast<int>(pooled_probs.size())) {
    throw ValidationError("select_top_k: k out of range");
  }
  std::vector<int> order(pooled_probs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (pooled_probs[static_cast<size_t>(a)] != pooled_probs[static_cast<size_t>(b)]) {
      return pooled_probs[static_cast<size_t>(a)] > pooled_probs[static_cast<size_t>(b)];
    }
    return a < b;
  });
  return std::set<int>(order.begin(), order.begin() + k);
}

IngredientEditor::IngredientEditor(EditorConfig cfg, WordVocab name_vocab, int n_ingredients,
                                   uint64_t seed)
    : cfg_(cfg), name_vocab_(std::move(name_vocab)), n_ingredients_(n_ingredients) {
  params_.config = cfg_.arch;
  Rng rng = Rng::substream(seed, "editor-init");
  int64_t d = cfg_.arch.d_model;
  nn::init_embedding(params_, "embed.tok",
                     kNumConstraints + static_cast<int64_t>(name_vocab_.size()), d, rng);
  nn::init_embedding(params_, "embed.pos", cfg_.max_enc_len, d, rng);
  nn::init_embedding(params_, "embed.ingr", static_cast<int64_t>(n_ingredients_) + 1, d, rng);
  nn::init_encoder_layers(params_, cfg_.arch.n_layers, rng);
  nn::init_decoder_layers(params_, cfg_.arch.n_layers, rng);
  nn::init_linear(params_, "out", d, static_cast<int64_t>(n_ingredients_) + 1, rng);
  params_.params["out.eos_pos"] = nn::TensorValue({cfg_.max_dec_len, 1}, 0.0);
}

std::vector<int> IngredientEditor::encoder_ids(const EditorInput& input) const {
  if (input.name_tokens.empty()) throw ValidationError("editor input: empty recipe name");
  std::vector<int> ids;
  ids.push_back(static_cast<int>(input.constraint));
  for (const auto& tok : input.name_tokens) {
    if (static_cast<int>(ids.size()) >= cfg_.max_enc_len) break;
    ids.push_back(kNumConstraints + name_vocab_.id(tok));
  }
  return ids;
}

Node* IngredientEditor::score_positions(Graph& g, const EditorInput& input, int n_positions) {
  if (n_positions < 1) throw ValidationError("score_positions: need at least one position");
  if (n_positions > cfg_.max_dec_len) {
    throw ValidationError("score_positions: position count exceeds max_dec_len");
  }
  for (int id : input.base_ingredient_ids) {
    if (id < 0 || id >= n_ingredients_) throw ValidationError("score_positions: ingredient id out of range");
  }

  std::vector<int> enc_ids = encoder_ids(input);
  std::vector<int> pos_ids(enc_ids.size());
  for (size_t i = 0; i < pos_ids.size(); ++i) pos_ids[i] = static_cast<int>(i);
  Node* enc_x = g.add(g.rows_lookup(g.param(params_.at("embed.tok")), enc_ids),
                      g.rows_lookup(g.param(params_.at("embed.pos")), pos_ids));
  Node* enc = nn::transformer_encoder(g, params_, enc_x, cfg_.arch.n_layers);

  // Decoder slots: the base ingredients in their given order, padded with
  // the dedicated slot token. No positional signal and no causal mask.
  std::vector<int> dec_ids(static_cast<size_t>(n_positions), n_ingredients_);
  for (size_t i = 0; i < input.base_ingredient_ids.size() && i < dec_ids.size(); ++i) {
    dec_ids[i] = input.base_ingredient_ids[i];
  }
  Node* dec_x = g.rows_lookup(g.param(params_.at("embed.ingr")), dec_ids);
  Node* dec = nn::transformer_decoder(g, params_, dec_x, enc, cfg_.arch.n_layers, false);

  Node* logits = g.add_row_broadcast(g.matmul(dec, g.param(params_.at("out.w"))),
                                     g.param(params_.at("out.b")));
  Node* eos_bias = g.row_slice(g.param(params_.at("out.eos_pos")), 0, n_positions);
  return g.add(logits, g.scatter_cols(eos_bias, {n_ingredients_}, n_ingredients_ + 1));
}

Node* IngredientEditor::loss(Graph& g, const EditorInput& input, const std::set<int>& target_ids,
                             int k_true, int n_positions) {
  if (k_true > n_positions) throw ValidationError("editor loss: k_true exceeds position count");
  Node* logits = score_positions(g, input, n_positions);

  Node* pooled = g.col_slice(g.col_max(logits), 0, n_ingredients_);
  std::vector<double> membership(static_cast<size_t>(n_ingredients_), 0.0);
  for (int id : target_ids) membership[static_cast<size_t>(id)] = 1.0;
  Node* set_loss = g.bce_with_logits(pooled, membership);

  Node* eos = g.col_slice(logits, n_ingredients_, 1);
  std::vector<double> eos_labels(static_cast<size_t>(n_positions), 0.0);
  if (k_true < n_positions) eos_labels[static_cast<size_t>(k_true)] = 1.0;
  Node* card_loss = g.bce_with_logits(eos, eos_labels);

  return g.add(set_loss, card_loss);
}

EditorPrediction IngredientEditor::predict(const EditorInput& input, Rng* rng, int n_positions) {
  int t = n_positions > 0 ? n_positions : default_positions(input);
  Graph g;
  Node* logits = score_positions(g, input, t);

  EditorPrediction pred;
  std::vector<double> pooled_logits = pool_scores(logits->val, t, n_ingredients_);
  pred.pooled_probs = sigmoid_all(pooled_logits);

  std::vector<double> eos_logits(static_cast<size_t>(t));
  int64_t width = n_ingredients_ + 1;
  for (int64_t i = 0; i < t; ++i) {
    eos_logits[static_cast<size_t>(i)] = logits->val[static_cast<size_t>(i * width + n_ingredients_)];
  }
  pred.eos_probs = sigmoid_all(eos_logits);

  pred.k_predicted =
      rng ? predict_cardinality(eos_logits, *rng) : deterministic_cardinality(pred.eos_probs);
  pred.k_predicted = std::min(pred.k_predicted, n_ingredients_);
  pred.selected = select_top_k(pred.pooled_probs, pred.k_predicted);
  return pred;
}

namespace {

constexpr const char* kEditorKind = "ingredient-editor";

json editor_metadata(const IngredientEditor& model) {
  const EditorConfig& cfg = model.config();
  return json{
      {"kind", kEditorKind},
      {"arch",
       {{"n_layers", cfg.arch.n_layers},
        {"d_model", cfg.arch.d_model},
        {"n_heads", cfg.arch.n_heads},
        {"d_ff", cfg.arch.d_ff},
        {"d_embed", cfg.arch.d_embed}}},
      {"margin", cfg.margin},
      {"max_enc_len", cfg.max_enc_len},
      {"max_dec_len", cfg.max_dec_len},
      {"n_ingredients", model.n_ingredients()},
      {"name_vocab", model.name_vocab().to_json()},
      {"trained", model.trained()},
  };
}

}  // namespace

void IngredientEditor::save(const std::string& path) const {
  nn::save_checkpoint(path, params_, editor_metadata(*this).dump());
}

IngredientEditor IngredientEditor::load(const std::string& path) {
  nn::ParameterStore store;
  json meta = json::parse(nn::load_checkpoint(path, store));
  if (meta.value("kind", "") != kEditorKind) {
    throw ValidationError(path + ": not an ingredient-editor checkpoint");
  }
  EditorConfig cfg;
  cfg.arch.n_layers = meta.at("arch").at("n_layers").get<int>();
  cfg.arch.d_model = meta.at("arch").at("d_model").get<int>();
  cfg.arch.n_heads = meta.at("arch").at("n_heads").get<int>();
  cfg.arch.d_ff = meta.at("arch").at("d_ff").get<int>();
  cfg.arch.d_embed = meta.at("arch").at("d_embed").get<int>();
  cfg.margin = meta.at("margin").get<int>();
  cfg.max_enc_len = meta.at("max_enc_len").get<int>();
  cfg.max_dec_len = meta.at("max_dec_len").get<int>();

  IngredientEditor model(cfg, WordVocab::from_json(meta.at("name_vocab")),
                         meta.at("n_ingredients").get<int>(), 0);
  model.params_ = std::move(store);
  model.params_.config = cfg.arch;
  if (meta.value("trained", false)) model.mark_trained();
  return model;
}

EditorExample make_editor_example(const Recipe& base, const Recipe& target,
                                  ConstraintId constraint) {
  EditorExample ex;
  ex.input.constraint = constraint;
  ex.input.name_tokens = base.name_tokens;
  ex.input.base_ingredient_ids.assign(base.ingredient_ids.begin(), base.ingredient_ids.end());
  ex.target_ids = target.ingredient_ids;
  return ex;
}

double editor_set_f1(IngredientEditor& model, const std::vector<EditorExample>& examples) {
  if (examples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& ex : examples) {
    EditorPrediction pred = model.predict(ex.input);
    size_t inter = 0;
    for (int id : pred.selected) inter += ex.target_ids.count(id);
    size_t denom = pred.selected.size() + ex.target_ids.size();
    acc += denom == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(denom);
  }
  return acc / static_cast<double>(examples.size());
}

TrainHistory train_editor(IngredientEditor& model, const std::vector<EditorExample>& train,
                          const std::vector<EditorExample>& val,
                          const EditorTrainOptions& options, uint64_t seed) {
  if (train.empty()) throw ValidationError("train_editor: no training examples");

  TrainHistory history;
  nn::LambOptions lamb;
  lamb.learning_rate = options.learning_rate;
  nn::OptimizerState opt = nn::make_optimizer_state(model.params(), lamb);
  Rng shuffle_rng = Rng::substream(seed, "editor-shuffle");

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  double best_val = -1.0;
  int since_best = 0;
  std::map<std::string, nn::TensorValue> best_params;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t in_batch = 0;
    model.params().zero_grads();
    for (size_t step = 0; step < order.size(); ++step) {
      const EditorExample& ex = train[order[step]];
      int k_true = static_cast<int>(ex.target_ids.size());
      int t = std::min(std::max(model.default_positions(ex.input), k_true + 1),
                       model.config().max_dec_len);
      Graph g;
      Node* loss = model.loss(g, ex.input, ex.target_ids, k_true, t);
      double value = loss->scalar();
      if (!std::isfinite(value)) {
        history.diverged = true;
        if (!best_params.empty()) model.params().params = best_params;
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

    double val_f1 = val.empty() ? 0.0 : editor_set_f1(model, val);
    history.val_metric.push_back(val_f1);
    if (options.on_epoch) options.on_epoch(epoch, epoch_loss, val_f1);

    if (!val.empty()) {
      if (val_f1 > best_val + options.min_delta) {
        best_val = val_f1;
        history.best_epoch = epoch;
        since_best = 0;
        best_params = model.params().params;
      } else if (options.patience > 0 && ++since_best >= options.patience) {
        break;
      }
    }
  }
  if (!val.empty() && !best_params.empty()) model.params().params = best_params;
  model.mark_trained();
  return history;
}

EditorPrediction edit_ingredients(IngredientEditor& model, const Recipe& base,
                                  const ConstraintSpec& spec, const EditOptions& options) {
  if (!model.trained()) throw ValidationError("edit_ingredients: model has not been trained");
  EditorInput input;
  input.constraint = spec.id;
  input.name_tokens = base.name_tokens;
  input.base_ingredient_ids.assign(base.ingredient_ids.begin(), base.ingredient_ids.end());

  EditorPrediction pred = model.predict(input, options.rng);
  if (options.hard_filter) {
    pred.selected = rules::filter_ingredient_list(pred.selected, spec);
    pred.k_predicted = static_cast<int>(pred.selected.size());
  }
  return pred;
}

}  // namespace recedit::editor
