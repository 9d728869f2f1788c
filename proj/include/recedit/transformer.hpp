#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recedit/graph.hpp"
#include "recedit/rng.hpp"
#include "recedit/tensor.hpp"

namespace recedit::nn {

// Token embedding: row lookup in `table`, optionally projected through a
// factor matrix (factorized embeddings keep the table narrow).
Node* embed(Graph& g, const std::vector<int>& ids, Node* table, Node* factor = nullptr);

// softmax(Q K^T / divisor + mask) V. `mask` may be null; otherwise an
// additive [rows(Q), rows(K)] constant (0 or -inf entries).
Node* scaled_dot_attention(Graph& g, Node* q, Node* k, Node* v, Node* mask, double divisor);

Node* causal_mask(Graph& g, int64_t len);

// Multi-head attention block. Queries come from `x_q`, keys/values from
// `x_kv`. Parameter names are looked up as "<prefix>.wq" etc.
Node* multi_head_attention(Graph& g, ParameterStore& store, const std::string& prefix, Node* x_q,
                           Node* x_kv, Node* mask, int n_heads);

// Pre-norm residual stacks. With n_layers = 0 both are the identity.
Node* transformer_encoder(Graph& g, ParameterStore& store, Node* inputs, int n_layers);
Node* transformer_decoder(Graph& g, ParameterStore& store, Node* targets, Node* encoder_states,
                          int n_layers, bool causal);

// Parameter construction. `init_*` add tensors to the store; they are
// deterministic given the rng.
void init_linear(ParameterStore& store, const std::string& prefix, int64_t in, int64_t out,
                 Rng& rng);
void init_layer_norm(ParameterStore& store, const std::string& prefix, int64_t width);
void init_embedding(ParameterStore& store, const std::string& name, int64_t rows, int64_t cols,
                    Rng& rng);
void init_encoder_layers(ParameterStore& store, int n_layers, Rng& rng);
void init_decoder_layers(ParameterStore& store, int n_layers, Rng& rng);

}  // namespace recedit::nn
