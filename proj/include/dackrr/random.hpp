#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace dackrr {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Folds a list of integers into a single 64-bit key. Used to derive
/// independent sub-seeds such as (seed, N, m, trial).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// Counter-based generator: the i-th output is mix64(key + i * gamma). Any
/// draw is a pure function of (key, counter), so streams keyed by derived
/// sub-seeds are independent of execution order.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dackrr
