#include "recedit/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace recedit::nn {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double stable_sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Node* Graph::make(std::vector<int64_t> shape) {
  nodes_.emplace_back();
  Node* n = &nodes_.back();
  n->shape = std::move(shape);
  n->val.assign(TensorValue::shape_size(n->shape), 0.0);
  n->grad.assign(n->val.size(), 0.0);
  return n;
}

Node* Graph::param(TensorValue& p) {
  Node* n = make(p.shape);
  n->val = p.data;
  leaves_.push_back({n, &p});
  return n;
}

Node* Graph::constant(std::vector<int64_t> shape, std::vector<double> v) {
  Node* n = make(std::move(shape));
  require(v.size() == n->val.size(), "constant: data does not match shape");
  n->val = std::move(v);
  return n;
}

Node* Graph::matmul(Node* a, Node* b) {
  int64_t m = a->rows(), k = a->cols(), k2 = b->rows(), n = b->cols();
  require(k == k2, "matmul: inner dimensions disagree");
  Node* out = make({m, n});
  const double* A = a->val.data();
  const double* B = b->val.data();
  double* C = out->val.data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* Brow = B + p * n;
      double* Crow = C + i * n;
      for (int64_t j = 0; j < n; ++j) Crow[j] += av * Brow[j];
    }
  }
  out->back = [a, b, out, m, n, k] {
    const double* G = out->grad.data();
    const double* A = a->val.data();
    const double* B = b->val.data();
    double* dA = a->grad.data();
    double* dB = b->grad.data();
    // dA = G * B^T
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        double g = G[i * n + j];
        if (g == 0.0) continue;
        const double* Brow = B + j;  // column j strided
        double* dArow = dA + i * k;
        for (int64_t p = 0; p < k; ++p) dArow[p] += g * Brow[p * n];
      }
    }
    // dB = A^T * G
    for (int64_t p = 0; p < k; ++p) {
      for (int64_t i = 0; i < m; ++i) {
        double av = A[i * k + p];
        if (av == 0.0) continue;
        const double* Grow = G + i * n;
        double* dBrow = dB + p * n;
        for (int64_t j = 0; j < n; ++j) dBrow[j] += av * Grow[j];
      }
    }
  };
  return out;
}

Node* Graph::transpose(Node* a) {
  int64_t m = a->rows(), n = a->cols();
  Node* out = make({n, m});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out->val[j * m + i] = a->val[i * n + j];
  }
  out->back = [a, out, m, n] {
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < n; ++j) a->grad[i * n + j] += out->grad[j * m + i];
    }
  };
  return out;
}

Node* Graph::add(Node* a, Node* b) {
  require(a->shape == b->shape, "add: shape mismatch");
  Node* out = make(a->shape);
  for (size_t i = 0; i < out->size(); ++i) out->val[i] = a->val[i] + b->val[i];
  out->back = [a, b, out] {
    for (size_t i = 0; i < out->size(); ++i) {
      a->grad[i] += out->grad[i];
      b->grad[i] += out->grad[i];
    }
  };
  return out;
}

Node* Graph::sub(Node* a, Node* b) {
  require(a->shape == b->shape, "sub: shape mismatch");
  Node* out = make(a->shape);
  for (size_t i = 0; i < out->size(); ++i) out->val[i] = a->val[i] - b->val[i];
  out->back = [a, b, out] {
    for (size_t i = 0; i < out->size(); ++i) {
      a->grad[i] += out->grad[i];
      b->grad[i] -= out->grad[i];
    }
  };
  return out;
}

Node* Graph::add_row_broadcast(Node* a, Node* b) {
  int64_t m = a->rows(), n = a->cols();
  require(b->size() == static_cast<size_t>(n), "add_row_broadcast: width mismatch");
  Node* out = make(a->shape);
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out->val[i * n + j] = a->val[i * n + j] + b->val[j];
  }
  out->back = [a, b, out, m, n] {
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        a->grad[i * n + j] += out->grad[i * n + j];
        b->grad[j] += out->grad[i * n + j];
      }
    }
  };
  return out;
}

Node* Graph::mul(Node* a, Node* b) {
  require(a->shape == b->shape, "mul: shape mismatch");
  Node* out = make(a->shape);
  for (size_t i = 0; i < out->size(); ++i) out->val[i] = a->val[i] * b->val[i];
  out->back = [a, b, out] {
    for (size_t i = 0; i < out->size(); ++i) {
      a->grad[i] += out->grad[i] * b->val[i];
      b->grad[i] += out->grad[i] * a->val[i];
    }
  };
  return out;
}

Node* Graph::affine(Node* a, double k, double c) {
  Node* out = make(a->shape);
  for (size_t i = 0; i < out->size(); ++i) out->val[i] = k * a->val[i] + c;
  out->back = [a, out, k] {
    for (size_t i = 0; i < out->size(); ++i) a->grad[i] += k * out->grad[i];
  };
  return out;
}

Node* Graph::scale_rows(Node* a, Node* s) {
  int64_t m = a->rows(), n = a->cols();
  require(s->size() == static_cast<size_t>(m), "scale_rows: row count mismatch");
  Node* out = make(a->shape);
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out->val[i * n + j] = a->val[i * n + j] * s->val[i];
  }
  out->back = [a, s, out, m, n] {
    for (int64_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int64_t j = 0; j < n; ++j) {
        a->grad[i * n + j] += out->grad[i * n + j] * s->val[i];
        acc += out->grad[i * n + j] * a->val[i * n + j];
      }
      s->grad[i] += acc;
    }
  };
  return out;
}

Node* Graph::relu(Node* a) {
  Node* out = make(a->shape);
  for (size_t i = 0; i < out->size(); ++i) out->val[i] = a->val[i] > 0 ? a->val[i] : 0.0;
  out->back = [a, out] {
    for (size_t i = 0; i < out->size(); ++i) {
      if (a->val[i] > 0) a->grad[i] += out->grad[i];
    }
  };
  return out;
}

Node* Graph::sigmoid(Node* a) {
  Node* out = make(a->shape);
  for (size_t i = 0; i < out->size(); ++i) out->val[i] = stable_sigmoid(a->val[i]);
  out->back = [a, out] {
    for (size_t i = 0; i < out->size(); ++i) {
      a->grad[i] += out->grad[i] * out->val[i] * (1.0 - out->val[i]);
    }
  };
  return out;
}

Node* Graph::softmax_rows(Node* a) {
  int64_t m = a->rows(), n = a->cols();
  Node* out = make(a->shape);
  for (int64_t i = 0; i < m; ++i) {
    const double* x = a->val.data() + i * n;
    double* p = out->val.data() + i * n;
    double mx = x[0];
    for (int64_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      p[j] = std::exp(x[j] - mx);
      z += p[j];
    }
    for (int64_t j = 0; j < n; ++j) p[j] /= z;
  }
  out->back = [a, out, m, n] {
    for (int64_t i = 0; i < m; ++i) {
      const double* p = out->val.data() + i * n;
      const double* g = out->grad.data() + i * n;
      double dot = 0.0;
      for (int64_t j = 0; j < n; ++j) dot += p[j] * g[j];
      double* da = a->grad.data() + i * n;
      for (int64_t j = 0; j < n; ++j) da[j] += p[j] * (g[j] - dot);
    }
  };
  return out;
}

Node* Graph::layer_norm(Node* x, Node* gain, Node* bias, double eps) {
  int64_t m = x->rows(), n = x->cols();
  require(gain->size() == static_cast<size_t>(n) && bias->size() == static_cast<size_t>(n),
          "layer_norm: gain/bias width mismatch");
  Node* out = make(x->shape);
  // Cache row statistics for the backward pass.
  auto stats = std::make_shared<std::vector<double>>(2 * m);
  for (int64_t i = 0; i < m; ++i) {
    const double* xi = x->val.data() + i * n;
    double mean = 0.0;
    for (int64_t j = 0; j < n; ++j) mean += xi[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t j = 0; j < n; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<double>(n);
    double inv_std = 1.0 / std::sqrt(var + eps);
    (*stats)[2 * i] = mean;
    (*stats)[2 * i + 1] = inv_std;
    double* yi = out->val.data() + i * n;
    for (int64_t j = 0; j < n; ++j) {
      yi[j] = (xi[j] - mean) * inv_std * gain->val[j] + bias->val[j];
    }
  }
  out->back = [x, gain, bias, out, stats, m, n] {
    for (int64_t i = 0; i < m; ++i) {
      const double mean = (*stats)[2 * i];
      const double inv_std = (*stats)[2 * i + 1];
      const double* xi = x->val.data() + i * n;
      const double* gi = out->grad.data() + i * n;
      double sum_gh = 0.0;   // sum of g*gain
      double sum_ghx = 0.0;  // sum of g*gain*xhat
      for (int64_t j = 0; j < n; ++j) {
        double xh = (xi[j] - mean) * inv_std;
        double gh = gi[j] * gain->val[j];
        sum_gh += gh;
        sum_ghx += gh * xh;
        gain->grad[j] += gi[j] * xh;
        bias->grad[j] += gi[j];
      }
      double* dx = x->grad.data() + i * n;
      double inv_n = 1.0 / static_cast<double>(n);
      for (int64_t j = 0; j < n; ++j) {
        double xh = (xi[j] - mean) * inv_std;
        double gh = gi[j] * gain->val[j];
        dx[j] += inv_std * (gh - inv_n * sum_gh - xh * inv_n * sum_ghx);
      }
    }
  };
  return out;
}

Node* Graph::rows_lookup(Node* table, const std::vector<int>& ids) {
  int64_t n = table->cols();
  int64_t rows = table->rows();
  Node* out = make({static_cast<int64_t>(ids.size()), n});
  for (size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < rows, "rows_lookup: id out of range");
    std::copy_n(table->val.data() + static_cast<int64_t>(ids[i]) * n, n,
                out->val.data() + static_cast<int64_t>(i) * n);
  }
  out->back = [table, out, ids, n] {
    for (size_t i = 0; i < ids.size(); ++i) {
      const double* g = out->grad.data() + static_cast<int64_t>(i) * n;
      double* dst = table->grad.data() + static_cast<int64_t>(ids[i]) * n;
      for (int64_t j = 0; j < n; ++j) dst[j] += g[j];
    }
  };
  return out;
}

Node* Graph::row_slice(Node* a, int64_t start, int64_t len) {
  int64_t n = a->cols();
  require(start >= 0 && start + len <= a->rows(), "row_slice: out of range");
  Node* out = make({len, n});
  std::copy_n(a->val.data() + start * n, len * n, out->val.data());
  out->back = [a, out, start, len, n] {
    for (int64_t i = 0; i < len * n; ++i) a->grad[start * n + i] += out->grad[i];
  };
  return out;
}

Node* Graph::col_slice(Node* a, int64_t start, int64_t len) {
  int64_t m = a->rows(), n = a->cols();
  require(start >= 0 && start + len <= n, "col_slice: out of range");
  Node* out = make({m, len});
  for (int64_t i = 0; i < m; ++i) {
    std::copy_n(a->val.data() + i * n + start, len, out->val.data() + i * len);
  }
  out->back = [a, out, start, len, m, n] {
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < len; ++j) a->grad[i * n + start + j] += out->grad[i * len + j];
    }
  };
  return out;
}

Node* Graph::concat_cols(const std::vector<Node*>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  int64_t m = parts[0]->rows();
  int64_t n = 0;
  for (Node* p : parts) {
    require(p->rows() == m, "concat_cols: row mismatch");
    n += p->cols();
  }
  Node* out = make({m, n});
  int64_t off = 0;
  for (Node* p : parts) {
    int64_t w = p->cols();
    for (int64_t i = 0; i < m; ++i) {
      std::copy_n(p->val.data() + i * w, w, out->val.data() + i * n + off);
    }
    off += w;
  }
  out->back = [parts, out, m, n] {
    int64_t off = 0;
    for (Node* p : parts) {
      int64_t w = p->cols();
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < w; ++j) p->grad[i * w + j] += out->grad[i * n + off + j];
      }
      off += w;
    }
  };
  return out;
}

Node* Graph::col_max(Node* a) {
  int64_t m = a->rows(), n = a->cols();
  require(m >= 1, "col_max: empty input");
  Node* out = make({1, n});
  auto argmax = std::make_shared<std::vector<int64_t>>(n, 0);
  for (int64_t j = 0; j < n; ++j) {
    double best = a->val[j];
    int64_t bi = 0;
    for (int64_t i = 1; i < m; ++i) {
      if (a->val[i * n + j] > best) {
        best = a->val[i * n + j];
        bi = i;
      }
    }
    out->val[j] = best;
    (*argmax)[j] = bi;
  }
  out->back = [a, out, argmax, n] {
    for (int64_t j = 0; j < n; ++j) a->grad[(*argmax)[j] * n + j] += out->grad[j];
  };
  return out;
}

Node* Graph::mean_all(Node* a) {
  Node* out = make({1});
  double inv = 1.0 / static_cast<double>(a->size());
  double acc = 0.0;
  for (double v : a->val) acc += v;
  out->val[0] = acc * inv;
  out->back = [a, out, inv] {
    for (size_t i = 0; i < a->size(); ++i) a->grad[i] += out->grad[0] * inv;
  };
  return out;
}

Node* Graph::sum_all(Node* a) {
  Node* out = make({1});
  double acc = 0.0;
  for (double v : a->val) acc += v;
  out->val[0] = acc;
  out->back = [a, out] {
    for (size_t i = 0; i < a->size(); ++i) a->grad[i] += out->grad[0];
  };
  return out;
}

Node* Graph::scatter_cols(Node* a, const std::vector<int>& dest, int64_t n_cols) {
  int64_t m = a->rows(), k = a->cols();
  require(dest.size() == static_cast<size_t>(k), "scatter_cols: index count mismatch");
  for (int d : dest) require(d >= 0 && d < n_cols, "scatter_cols: index out of range");
  Node* out = make({m, n_cols});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < k; ++j) out->val[i * n_cols + dest[j]] += a->val[i * k + j];
  }
  out->back = [a, out, dest, m, k, n_cols] {
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < k; ++j) a->grad[i * k + j] += out->grad[i * n_cols + dest[j]];
    }
  };
  return out;
}

Node* Graph::pick_per_row(Node* a, const std::vector<int>& ids) {
  int64_t m = a->rows(), n = a->cols();
  require(ids.size() == static_cast<size_t>(m), "pick_per_row: id count mismatch");
  Node* out = make({m, 1});
  for (int64_t i = 0; i < m; ++i) {
    require(ids[i] >= 0 && ids[i] < n, "pick_per_row: id out of range");
    out->val[i] = a->val[i * n + ids[i]];
  }
  out->back = [a, out, ids, m, n] {
    for (int64_t i = 0; i < m; ++i) a->grad[i * n + ids[i]] += out->grad[i];
  };
  return out;
}

Node* Graph::log_floor(Node* a, double floor, long* n_clamped) {
  Node* out = make(a->shape);
  auto clamped = std::make_shared<std::vector<bool>>(a->size(), false);
  long hits = 0;
  for (size_t i = 0; i < a->size(); ++i) {
    double v = a->val[i];
    if (v < floor) {
      v = floor;
      (*clamped)[i] = true;
      ++hits;
    }
    out->val[i] = std::log(v);
  }
  if (n_clamped) *n_clamped += hits;
  out->back = [a, out, clamped] {
    for (size_t i = 0; i < a->size(); ++i) {
      if (!(*clamped)[i]) a->grad[i] += out->grad[i] / a->val[i];
    }
  };
  return out;
}

Node* Graph::bce_with_logits(Node* logits, const std::vector<double>& labels) {
  require(labels.size() == logits->size(), "bce_with_logits: label count mismatch");
  Node* out = make({1});
  double acc = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    double z = logits->val[i];
    if (!std::isfinite(z)) throw std::invalid_argument("bce_with_logits: non-finite logit");
    // max(z,0) - z*y + log(1 + exp(-|z|))
    acc += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  double inv = 1.0 / static_cast<double>(labels.size());
  out->val[0] = acc * inv;
  out->back = [logits, out, labels, inv] {
    for (size_t i = 0; i < labels.size(); ++i) {
      logits->grad[i] += out->grad[0] * inv * (stable_sigmoid(logits->val[i]) - labels[i]);
    }
  };
  return out;
}

Node* Graph::cross_entropy(Node* logits, const std::vector<int>& target_ids) {
  int64_t m = logits->rows(), n = logits->cols();
  require(target_ids.size() == static_cast<size_t>(m), "cross_entropy: target count mismatch");
  Node* out = make({1});
  double acc = 0.0;
  for (int64_t i = 0; i < m; ++i) {
    require(target_ids[i] >= 0 && target_ids[i] < n, "cross_entropy: target id out of range");
    const double* x = logits->val.data() + i * n;
    double mx = x[0];
    for (int64_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    if (!std::isfinite(mx)) throw std::invalid_argument("cross_entropy: non-finite logit");
    double z = 0.0;
    for (int64_t j = 0; j < n; ++j) z += std::exp(x[j] - mx);
    acc += mx + std::log(z) - x[target_ids[i]];
  }
  double inv = 1.0 / static_cast<double>(m);
  out->val[0] = acc * inv;
  out->back = [logits, out, target_ids, m, n, inv] {
    for (int64_t i = 0; i < m; ++i) {
      const double* x = logits->val.data() + i * n;
      double* dx = logits->grad.data() + i * n;
      double mx = x[0];
      for (int64_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
      double z = 0.0;
      for (int64_t j = 0; j < n; ++j) z += std::exp(x[j] - mx);
      double g = out->grad[0] * inv;
      for (int64_t j = 0; j < n; ++j) {
        double p = std::exp(x[j] - mx) / z;
        dx[j] += g * (p - (j == target_ids[i] ? 1.0 : 0.0));
      }
    }
  };
  return out;
}

void Graph::backward(Node* loss) {
  require(loss->size() == 1, "backward: loss must be scalar");
  loss->grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->back) it->back();
  }
  for (auto& [node, tensor] : leaves_) {
    tensor->ensure_grad();
    for (size_t i = 0; i < node->grad.size(); ++i) tensor->grad[i] += node->grad[i];
  }
}

}  // namespace recedit::nn
