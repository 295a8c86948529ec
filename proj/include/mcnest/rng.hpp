#pragma once

#include <cstdint>
#include <random>

namespace mcnest {

/// Seeded random source. mt19937_64 output is pinned by the standard, and the
/// [0,1) mapping is done by hand, so draw sequences are identical across
/// platforms and standard libraries (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double next_uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mcnest
