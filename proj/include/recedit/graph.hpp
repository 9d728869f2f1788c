#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "recedit/tensor.hpp"

namespace recedit::nn {

// One value in a reverse-mode tape. Nodes live in a Graph arena and are
// only valid while it is.
struct Node {
  std::vector<int64_t> shape;
  std::vector<double> val;
  std::vector<double> grad;
  std::function<void()> back;  // accumulates into parents' grads; empty for leaves

  size_t size() const { return val.size(); }
  int64_t rows() const { return shape.empty() ? 1 : shape[0]; }
  int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double scalar() const { return val.at(0); }
};

// Tape-style autograd over 2-D (and scalar) tensors. Build one Graph per
// forward pass; backward() walks the tape in reverse creation order, so
// ops may only consume nodes created earlier.
class Graph {
 public:
  // Leaf bound to a parameter: after backward() its gradient is added
  // into `p.grad`.
  Node* param(TensorValue& p);
  Node* constant(std::vector<int64_t> shape, std::vector<double> v);
  Node* scalar(double v) { return constant({1}, {v}); }

  Node* matmul(Node* a, Node* b);
  Node* transpose(Node* a);
  Node* add(Node* a, Node* b);                 // same shape
  Node* sub(Node* a, Node* b);
  Node* add_row_broadcast(Node* a, Node* b);   // a[m,n] + b[1,n]
  Node* mul(Node* a, Node* b);                 // elementwise, same shape
  Node* affine(Node* a, double k, double c);   // k*a + c elementwise
  Node* scale_rows(Node* a, Node* s);          // a[m,n] * s[m,1] broadcast
  Node* relu(Node* a);
  Node* sigmoid(Node* a);
  Node* softmax_rows(Node* a);
  Node* layer_norm(Node* x, Node* gain, Node* bias, double eps = 1e-5);
  Node* rows_lookup(Node* table, const std::vector<int>& ids);
  Node* row_slice(Node* a, int64_t start, int64_t len);
  Node* col_slice(Node* a, int64_t start, int64_t len);
  Node* concat_cols(const std::vector<Node*>& parts);
  Node* col_max(Node* a);                      // [1,n] column maxima; grad to first argmax
  Node* mean_all(Node* a);
  Node* sum_all(Node* a);
  // Scatter columns of a[m,k] into an [m,n] tensor: column j of `a` is
  // added into destination column dest[j]. Duplicate destinations
  // accumulate.
  Node* scatter_cols(Node* a, const std::vector<int>& dest, int64_t n_cols);
  Node* pick_per_row(Node* a, const std::vector<int>& ids);  // [m,1]
  // Elementwise log with a floor: values below `floor` are clamped before
  // the log and counted in *n_clamped (may be null).
  Node* log_floor(Node* a, double floor, long* n_clamped = nullptr);

  // Numerically stable mean binary cross-entropy from logits.
  Node* bce_with_logits(Node* logits, const std::vector<double>& labels);
  // Mean cross-entropy of row-wise softmax against target ids.
  Node* cross_entropy(Node* logits, const std::vector<int>& target_ids);

  void backward(Node* loss);

  size_t n_nodes() const { return nodes_.size(); }

 private:
  Node* make(std::vector<int64_t> shape);

  std::deque<Node> nodes_;
  std::vector<std::pair<Node*, TensorValue*>> leaves_;
};

}  // namespace recedit::nn
