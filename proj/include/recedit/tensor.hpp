#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace recedit::nn {

// A shaped 64-bit float buffer, row-major, with an optional gradient of
// the same shape. Everything the models own (weights, moments) is one of
// these.
struct TensorValue {
  std::vector<int64_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass touches it

  TensorValue() = default;
  TensorValue(std::vector<int64_t> s, double fill = 0.0)
      : shape(std::move(s)), data(shape_size(shape), fill) {}

  static size_t shape_size(const std::vector<int64_t>& shape) {
    size_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("negative tensor dimension");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t size() const { return data.size(); }
  int64_t rows() const { return shape.empty() ? 1 : shape[0]; }
  int64_t cols() const { return shape.size() < 2 ? static_cast<int64_t>(size()) / rows() : shape[1]; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  }
};

struct ModelConfig {
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_ff = 256;
  int d_embed = 0;  // factorized embedding width; 0 means d_model (no factor)

  int embed_width() const { return d_embed > 0 ? d_embed : d_model; }
};

// Named parameter tensors plus the architecture they belong to. Iteration
// order is the sorted name order, which keeps serialization, gradient
// accumulation and optimizer updates deterministic.
struct ParameterStore {
  ModelConfig config;
  std::map<std::string, TensorValue> params;

  TensorValue& at(const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::out_of_range("no parameter named " + name);
    return it->second;
  }
  const TensorValue& at(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw std::out_of_range("no parameter named " + name);
    return it->second;
  }

  void zero_grads() {
    for (auto& [_, p] : params) p.zero_grad();
  }

  size_t n_scalars() const {
    size_t n = 0;
    for (const auto& [_, p] : params) n += p.size();
    return n;
  }
};

}  // namespace recedit::nn
