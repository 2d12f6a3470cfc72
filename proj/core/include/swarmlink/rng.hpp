#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "swarmlink/types.hpp"

namespace swarmlink {

/// Seeded PRNG used for every key, nonce and simulation draw.
///
/// The std::mt19937_64 output sequence is fixed by the standard; the
/// conversions below avoid std distributions, whose algorithms differ
/// between standard libraries, so a seed reproduces the same run anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in the closed range [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform01() < p); }

  void fill(std::span<std::uint8_t> out);

  template <std::size_t N>
  ByteArray<N> array() {
    ByteArray<N> out{};
    fill(out);
    return out;
  }

  /// Independent child stream; the parent's state is not advanced.
  Rng fork(std::string_view tag, std::uint64_t index = 0) const;

 private:
  std::uint64_t seed_material() const;

  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stable substream seed derivation: seed ⊕ FNV-1a(tag), mixed with index.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept;

}  // namespace swarmlink
