#pragma once

#include <cstdint>

namespace robdet {

/// Counter-based pseudo random stream (SplitMix64 finalizer over a keyed
/// counter). Every (seed, stream) pair yields an independent reproducible
/// sequence, so Monte Carlo work can be partitioned across workers by
/// assigning one stream per run and merged without affecting the result.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ 0x9e3779b97f4a7c15ull) ^ mix(mix(stream) + 0xbf58476d1ce4e5b9ull)) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

  /// Uniform draw in [0, 1) with 53 random bits.
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Derived stream, independent of this one and of other indices.
  CounterRng substream(std::uint64_t i) const {
    CounterRng r(key_, i + 0x100);
    return r;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace robdet
