#pragma once

#include <cstdint>

namespace peereff {

/// Counter-based 64-bit generator (SplitMix64).  Chosen over the standard
/// library engines because its output is bit-exact on every platform, which
/// keeps simulation and optimization runs byte-reproducible for a given seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0,1): 53 mantissa bits, never returns 1.0.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0,n).  Modulo bias is irrelevant for the tiny n
  /// used here (connection counts).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// Deterministic per-stream seed for sweep rows, restarts, etc.
/// Independent of evaluation order, so streams may run concurrently.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
  return SplitMix64(base_seed + stream_index).next_u64();
}

}  // namespace peereff
