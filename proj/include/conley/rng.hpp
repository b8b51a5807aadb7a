#pragma once

#include <cstdint>

namespace conley {

/// Counter-based generator: draw i of stream `seed` is a pure function of
/// (seed, i), so results do not depend on evaluation order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_pair(std::uint64_t seed, std::uint64_t counter) {
  return mix64(mix64(seed) ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(hash_pair(seed, counter) >> 11) * 0x1.0p-53;
}

/// Sequential view over a counter stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t start = 0) : seed_(seed), counter_(start) {}
  double uniform() { return uniform01(seed_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace conley
