/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_RNG_HPP
#define KTRAM_RNG_HPP

#include <cstdint>

namespace ktram {

/**
 * Counter-based deterministic random stream (splitmix64 over a draw counter).
 *
 * The stream is fully described by (seed, position): position counts draws,
 * so a stream can be serialized as a single u64 and resumed exactly. Output
 * is identical on every platform, which is what makes bit-exact state files
 * and byte-identical trace files possible.
 */
class RandomStream {
public:
  RandomStream() = default;
  explicit RandomStream(std::uint64_t seed, std::uint64_t position = 0)
      : seed_(seed), position_(position) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++position_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + next_unit() * (hi - lo); }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Binomial draw as a plain Bernoulli sum. O(n), but branch-free to reason
  /// about and insensitive to the library's binomial_distribution internals.
  std::uint32_t binomial(std::uint32_t n, double p) {
    std::uint32_t hits = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      hits += bernoulli(p) ? 1u : 0u;
    }
    return hits;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }
  void set_position(std::uint64_t position) { position_ = position; }

private:
  std::uint64_t seed_ = 0;
  std::uint64_t position_ = 0;
};

} // namespace ktram

#endif // KTRAM_RNG_HPP
