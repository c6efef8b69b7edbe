#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qss/bits.hpp"
#include "qss/errors.hpp"
#include "qss/gf2.hpp"

namespace qss {

// Nested codes C2 ⊂ C1. C1 corrects bit errors; the coset of a C1 codeword
// modulo C2 is the extracted key, key_bits = dim C1 - dim C2 bits per block.
//
// Coset labels: each coset is represented by its lexicographically smallest
// member (first bit most significant), representatives are sorted, and the
// i-th one gets label i written as key_bits binary digits. The zero coset is
// always label 0.
class CssPair {
 public:
  CssPair(gf2::LinearCode c1, gf2::LinearCode c2) : c1_(std::move(c1)), c2_(std::move(c2)) {
    if (c1_.length() != c2_.length()) throw DomainError("C1 and C2 have different lengths");
    for (const auto& row : c2_.generator().data())
      if (!c1_.contains(row)) throw DomainError("C2 is not contained in C1");
    key_bits_ = c1_.dimension() - c2_.dimension();
    c2_words_ = c2_.codewords();
    std::vector<Bits> reps;
    for (const auto& u : c1_.codewords()) {
      const auto rep = representative(u);
      if (rep == u) reps.push_back(rep);
    }
    std::sort(reps.begin(), reps.end());
    for (std::size_t i = 0; i < reps.size(); ++i) labels_.emplace(reps[i], i);
  }

  const gf2::LinearCode& c1() const noexcept { return c1_; }
  const gf2::LinearCode& c2() const noexcept { return c2_; }
  std::size_t key_bits() const noexcept { return key_bits_; }
  std::size_t block_length() const noexcept { return c1_.length(); }
  std::size_t coset_count() const noexcept { return labels_.size(); }

  // Smallest member of u + C2.
  Bits representative(std::span<const std::uint8_t> u) const {
    Bits best(u.begin(), u.end());
    for (const auto& c : c2_words_) {
      auto cand = xor_bits(u, c);
      if (cand < best) best = std::move(cand);
    }
    return best;
  }

  // Label K of the coset u + C2; u must be a codeword of C1.
  Bits coset_key(std::span<const std::uint8_t> u) const {
    if (!c1_.contains(u)) throw DomainError("coset key of a word outside C1");
    const auto label = labels_.at(representative(u));
    Bits k(key_bits_, 0);
    for (std::size_t b = 0; b < key_bits_; ++b) k[b] = static_cast<std::uint8_t>((label >> (key_bits_ - 1 - b)) & 1u);
    return k;
  }

 private:
  gf2::LinearCode c1_;
  gf2::LinearCode c2_;
  std::size_t key_bits_ = 0;
  std::vector<Bits> c2_words_;
  std::map<Bits, std::size_t> labels_;
};

// [7,4] Hamming code over its [7,3] simplex dual: one key bit per 7-bit
// block, one correctable bit error per block.
inline CssPair build_canonical_css() {
  const auto h = gf2::hamming7_parity_check();
  return CssPair(gf2::LinearCode::from_parity_check(h), gf2::LinearCode::from_generator(h));
}

}  // namespace qss
