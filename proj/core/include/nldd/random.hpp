#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nldd {

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64 is specified bit-for-bit by the standard, but the standard
/// distributions and std::shuffle are not, so reproducible experiments draw
/// through the helpers below instead.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller, cached second variate).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// 0, 1, ..., n-1 in seeded random order.
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace nldd
