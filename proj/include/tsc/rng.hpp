#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace tsc {

/// Mixes a base seed with a stream id (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Portable random source: mt19937_64 bits, with the integer and real
/// mappings implemented here so sequences do not depend on the standard
/// library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Uniform in [lo, hi], inclusive.
  long uniform_int(long lo, long hi);

  /// Uniform in [0, 1).
  double uniform();

  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tsc
