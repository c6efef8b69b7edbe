#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

#include "qss/bits.hpp"

namespace qss {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: the seed for item `index` of stream
// `stream` depends only on (master, stream, index), so any single trial can
// be replayed without running the ones before it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

// Seeded random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the helpers below avoid std:: distributions so
// results are identical across standard library implementations.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::uint8_t bit() {
    if (bits_left_ == 0) {
      bit_buffer_ = engine_();
      bits_left_ = 64;
    }
    const auto b = static_cast<std::uint8_t>(bit_buffer_ & 1u);
    bit_buffer_ >>= 1;
    --bits_left_;
    return b;
  }

  Bits bits(std::size_t n) {
    Bits out(n);
    for (auto& b : out) b = bit();
    return out;
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound); bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

}  // namespace qss
