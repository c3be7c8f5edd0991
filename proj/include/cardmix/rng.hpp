#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cardmix {

uint64_t splitmix64(uint64_t x);
uint64_t hash_name(std::string_view s);

/// Deterministic random source. std::mt19937_64 is bit-exact across
/// platforms; the standard distributions are not, so bounded integers and
/// doubles are derived here with fixed algorithms. Forked streams depend
/// only on (seed, stream tag), never on how many draws were consumed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, bound), bound > 0. Lemire multiply-shift with rejection.
  uint64_t below(uint64_t bound);

  /// Uniform in [lo, hi], inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);

  /// Uniform in [0, 1) with 53 random bits.
  double uniform_double();

  /// Weighted choice over non-negative weights; returns an index.
  size_t weighted_choice(const std::vector<double>& weights);

  Rng fork(uint64_t stream) const {
    return Rng(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }
  Rng fork(std::string_view name) const { return fork(hash_name(name)); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// k distinct indices out of [0, n), returned in ascending order.
  std::vector<size_t> sample_indices(size_t n, size_t k);

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace cardmix
