#pragma once

#include <cstdint>

namespace phaseest {

// Counter-based per-trial random stream. Every trial gets its own stream
// keyed by (seed, stream_id), so the sample set is independent of how
// trials are scheduled across threads. The generator is a SplitMix64
// sequence whose initial state is a hash of the key.
class TrialRng {
 public:
  TrialRng(uint64_t seed, uint64_t stream_id)
      : state_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^ mix(stream_id))) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform angle in [0, 2*pi).
  double next_angle() {
    return next_unit() * 6.283185307179586476925286766559005768;
  }

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

// Derives an independent seed for entry `index` of a batch keyed by `seed`.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  return TrialRng::mix(seed ^ TrialRng::mix(index + 0x6a09e667f3bcc909ull));
}

}  // namespace phaseest
