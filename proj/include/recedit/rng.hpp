#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace recedit {

// Deterministic RNG. Substreams are derived from one master seed and a
// stream name so pipeline stages (pairing, init, sampling, ...) never
// share state and stay reproducible independently of call order.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  static Rng substream(uint64_t master_seed, std::string_view name) {
    // FNV-1a over the name, mixed with the master seed.
    uint64_t h = 1469598103934665603ull;
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return Rng(h ^ (master_seed * 0x9e3779b97f4a7c15ull));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Inclusive bounds.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  // Box-Muller; avoids the implementation-defined std::normal_distribution.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + stddev * (r * std::cos(theta));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace recedit
