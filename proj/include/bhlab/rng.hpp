#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace bhlab {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded generator with platform-independent draws. The standard
/// distributions are implementation-defined, so every draw is derived here
/// directly from the mt19937_64 output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Independent stream for a sub-component (node, scenario, tree, ...).
  Rng substream(std::uint64_t key) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace bhlab
