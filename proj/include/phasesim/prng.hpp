#ifndef PHASESIM_PRNG_HPP
#define PHASESIM_PRNG_HPP

#include <cstdint>

namespace phasesim {

// splitmix64: 64-bit seedable generator with a single u64 of state.
// State serializes bit-exactly into checkpoints and the output stream is
// identical on every platform.
class SplitMix64 {
public:
  SplitMix64() = default;
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection sampling keeps the distribution exact.
  uint64_t next_below(uint64_t n) {
    uint64_t mask = ~uint64_t{0};
    if ((n & (n - 1)) == 0) return next() & (n - 1);
    uint64_t limit = mask - mask % n;
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

private:
  uint64_t state_ = 0;
};

// Stateless mix, used to derive independent per-phase seeds from one root seed.
inline uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace phasesim

#endif
