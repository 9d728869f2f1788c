#include "recedit/transformer.hpp"

#include <cmath>
#include <limits>

namespace recedit::nn {

Node* embed(Graph& g, const std::vector<int>& ids, Node* table, Node* factor) {
  Node* rows = g.rows_lookup(table, ids);
  return factor ? g.matmul(rows, factor) : rows;
}

Node* scaled_dot_attention(Graph& g, Node* q, Node* k, Node* v, Node* mask, double divisor) {
  Node* scores = g.affine(g.matmul(q, g.transpose(k)), 1.0 / divisor, 0.0);
  if (mask) scores = g.add(scores, mask);
  return g.matmul(g.softmax_rows(scores), v);
}

Node* causal_mask(Graph& g, int64_t len) {
  std::vector<double> m(static_cast<size_t>(len * len), 0.0);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (int64_t i = 0; i < len; ++i) {
    for (int64_t j = i + 1; j < len; ++j) m[i * len + j] = neg_inf;
  }
  return g.constant({len, len}, std::move(m));
}

namespace {

Node* linear(Graph& g, ParameterStore& s, const std::string& prefix, Node* x) {
  return g.add_row_broadcast(g.matmul(x, g.param(s.at(prefix + ".w"))),
                             g.param(s.at(prefix + ".b")));
}

Node* layer_norm_p(Graph& g, ParameterStore& s, const std::string& prefix, Node* x) {
  return g.layer_norm(x, g.param(s.at(prefix + ".g")), g.param(s.at(prefix + ".b")));
}

Node* feed_forward(Graph& g, ParameterStore& s, const std::string& prefix, Node* x) {
  return linear(g, s, prefix + ".out", g.relu(linear(g, s, prefix + ".in", x)));
}

}  // namespace

Node* multi_head_attention(Graph& g, ParameterStore& store, const std::string& prefix, Node* x_q,
                           Node* x_kv, Node* mask, int n_heads) {
  Node* q = linear(g, store, prefix + ".q", x_q);
  Node* k = linear(g, store, prefix + ".k", x_kv);
  Node* v = linear(g, store, prefix + ".v", x_kv);
  int64_t d = q->cols();
  if (d % n_heads != 0) throw std::invalid_argument("attention width not divisible by head count");
  int64_t dh = d / n_heads;
  double divisor = std::sqrt(static_cast<double>(dh));
  std::vector<Node*> heads;
  heads.reserve(static_cast<size_t>(n_heads));
  for (int h = 0; h < n_heads; ++h) {
    heads.push_back(scaled_dot_attention(g, g.col_slice(q, h * dh, dh), g.col_slice(k, h * dh, dh),
                                         g.col_slice(v, h * dh, dh), mask, divisor));
  }
  return linear(g, store, prefix + ".o", g.concat_cols(heads));
}

Node* transformer_encoder(Graph& g, ParameterStore& store, Node* inputs, int n_layers) {
  Node* x = inputs;
  int n_heads = store.config.n_heads;
  for (int l = 0; l < n_layers; ++l) {
    std::string p = "enc." + std::to_string(l);
    Node* h = layer_norm_p(g, store, p + ".ln1", x);
    x = g.add(x, multi_head_attention(g, store, p + ".self", h, h, nullptr, n_heads));
    x = g.add(x, feed_forward(g, store, p + ".ff", layer_norm_p(g, store, p + ".ln2", x)));
  }
  return x;
}

Node* transformer_decoder(Graph& g, ParameterStore& store, Node* targets, Node* encoder_states,
                          int n_layers, bool causal) {
  Node* x = targets;
  Node* mask = causal ? causal_mask(g, targets->rows()) : nullptr;
  int n_heads = store.config.n_heads;
  for (int l = 0; l < n_layers; ++l) {
    std::string p = "dec." + std::to_string(l);
    Node* h = layer_norm_p(g, store, p + ".ln1", x);
    x = g.add(x, multi_head_attention(g, store, p + ".self", h, h, mask, n_heads));
    if (encoder_states) {
      Node* hq = layer_norm_p(g, store, p + ".ln2", x);
      x = g.add(x, multi_head_attention(g, store, p + ".cross", hq, encoder_states, nullptr,
                                        n_heads));
    }
    x = g.add(x, feed_forward(g, store, p + ".ff", layer_norm_p(g, store, p + ".ln3", x)));
  }
  return x;
}

void init_linear(ParameterStore& store, const std::string& prefix, int64_t in, int64_t out,
                 Rng& rng) {
  TensorValue w({in, out});
  double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& v : w.data) v = rng.uniform(-bound, bound);
  store.params[prefix + ".w"] = std::move(w);
  store.params[prefix + ".b"] = TensorValue({out}, 0.0);
}

void init_layer_norm(ParameterStore& store, const std::string& prefix, int64_t width) {
  store.params[prefix + ".g"] = TensorValue({width}, 1.0);
  store.params[prefix + ".b"] = TensorValue({width}, 0.0);
}

void init_embedding(ParameterStore& store, const std::string& name, int64_t rows, int64_t cols,
                    Rng& rng) {
  TensorValue t({rows, cols});
  double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& v : t.data) v = rng.normal(0.0, scale);
  store.params[name] = std::move(t);
}

namespace {

void init_attention(ParameterStore& store, const std::string& prefix, Rng& rng) {
  int64_t d = store.config.d_model;
  init_linear(store, prefix + ".q", d, d, rng);
  init_linear(store, prefix + ".k", d, d, rng);
  init_linear(store, prefix + ".v", d, d, rng);
  init_linear(store, prefix + ".o", d, d, rng);
}

void init_ff(ParameterStore& store, const std::string& prefix, Rng& rng) {
  int64_t d = store.config.d_model;
  int64_t dff = store.config.d_ff;
  init_linear(store, prefix + ".in", d, dff, rng);
  init_linear(store, prefix + ".out", dff, d, rng);
}

}  // namespace

void init_encoder_layers(ParameterStore& store, int n_layers, Rng& rng) {
  int64_t d = store.config.d_model;
  for (int l = 0; l < n_layers; ++l) {
    std::string p = "enc." + std::to_string(l);
    init_layer_norm(store, p + ".ln1", d);
    init_attention(store, p + ".self", rng);
    init_layer_norm(store, p + ".ln2", d);
    init_ff(store, p + ".ff", rng);
  }
}

void init_decoder_layers(ParameterStore& store, int n_layers, Rng& rng) {
  int64_t d = store.config.d_model;
  for (int l = 0; l < n_layers; ++l) {
    std::string p = "dec." + std::to_string(l);
    init_layer_norm(store, p + ".ln1", d);
    init_attention(store, p + ".self", rng);
    init_layer_norm(store, p + ".ln2", d);
    init_attention(store, p + ".cross", rng);
    init_layer_norm(store, p + ".ln3", d);
    init_ff(store, p + ".ff", rng);
  }
}

}  // namespace recedit::nn
