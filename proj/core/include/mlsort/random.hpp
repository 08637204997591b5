#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mlsort {

// Seeded pseudo-random source used by every randomized component.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The std:: distributions are not (their algorithms vary between
// standard libraries), so conversions to doubles and bounded integers are
// done here explicitly. Same seed gives the same stream on every platform
// with IEEE-754 doubles and a conforming libm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi]; the upper bound is reachable only through rounding.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal draw (Box-Muller, one value per call).
  double normal();

  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

// Derives an independent child seed for stream `stream` of `seed`
// (SplitMix64 finalizer over the pair). Used to split work into
// shards, restarts, and benchmark repeats.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace mlsort
