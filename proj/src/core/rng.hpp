#pragma once

#include <cstdint>
#include <string_view>

namespace flores {

// Deterministic RNG with fixed bit mappings so that sequences are identical
// across compilers for a given seed. Distributions from <random> are
// implementation-defined and are deliberately not used.
class Rng {
 public:
  explicit Rng(uint64_t seed) { reseed(seed); }

  void reseed(uint64_t seed);

  uint64_t next_u64();

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform integer in [0, n)
  uint64_t uniform_int(uint64_t n);

  // inclusive integer range [lo, hi]
  int64_t uniform_int_range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform_int(static_cast<uint64_t>(hi - lo + 1)));
  }

  // standard normal via Box-Muller (deterministic, no cached spare)
  double normal();

 private:
  // xoshiro256++ state
  uint64_t s_[4];
};

// Derives a child seed from a master seed and a stream label; every component
// in the system obtains its seed through this single mechanism.
uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index = 0);

}  // namespace flores
