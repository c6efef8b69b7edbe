#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qss/bits.hpp"
#include "qss/css.hpp"
#include "qss/errors.hpp"
#include "qss/random.hpp"

namespace qss {

// H(d) = -d log2 d - (1-d) log2 (1-d), with H(0) = H(1) = 0.
inline double binary_entropy(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("binary entropy argument outside [0,1]");
  if (delta == 0.0 || delta == 1.0) return 0.0;
  return -delta * std::log2(delta) - (1.0 - delta) * std::log2(1.0 - delta);
}

// Asymptotic secret-key rate max(1 - 2 H(delta), 0).
inline double key_rate(double delta) { return std::max(1.0 - 2.0 * binary_entropy(delta), 0.0); }

// Both groups' sides of the sifted string plus the estimated error rate.
struct KeyMaterial {
  Bits v;        // senders' string
  Bits v_noisy;  // receivers' string, v + e
  double delta = 0.0;
  std::optional<Bits> final_key;
};

// A uniformly random C1 codeword.
inline Bits random_codeword(const gf2::LinearCode& code, RandomSource& rand) {
  return code.encode(rand.bits(code.dimension()));
}

// u = u_1 + ... + u_m with each u_i drawn by one sender.
inline Bits joint_codeword(const gf2::LinearCode& code, int senders, RandomSource& rand) {
  Bits u(code.length(), 0);
  for (int i = 0; i < senders; ++i) u = xor_bits(u, random_codeword(code, rand));
  return u;
}

struct BlockReconciliation {
  Bits public_word;               // u + v, announced by the senders
  std::optional<Bits> corrected;  // receivers' decoding of u + e
  Bits key_alice;
  std::optional<Bits> key_bob;    // nullopt when decoding failed

  bool agree() const { return key_bob && *key_bob == key_alice; }
};

// One block: the senders announce u+v; the receivers subtract it from v+e,
// decode u+e with C1 to u, and both sides keep the coset label of u.
inline BlockReconciliation reconcile(const CssPair& pair, std::span<const std::uint8_t> alices_v,
                                     std::span<const std::uint8_t> bobs_v_noisy, std::span<const std::uint8_t> u) {
  const auto n = pair.block_length();
  if (alices_v.size() != n || bobs_v_noisy.size() != n || u.size() != n)
    throw DomainError("reconciliation block length does not match the code");
  BlockReconciliation r;
  r.public_word = xor_bits(u, alices_v);
  r.key_alice = pair.coset_key(u);
  r.corrected = pair.c1().decode(xor_bits(bobs_v_noisy, r.public_word));
  if (r.corrected) r.key_bob = pair.coset_key(*r.corrected);
  return r;
}

struct ReconciliationReport {
  std::size_t blocks = 0;
  std::size_t agreed = 0;
  std::size_t failed = 0;  // decoding failures, dropped on both sides
  std::size_t padding = 0; // public filler bits in the last block
  Bits padding_bits;
  std::vector<BlockReconciliation> details;
  Bits key_alice;
  Bits key_bob;

  double yield() const { return blocks ? static_cast<double>(agreed) / static_cast<double>(blocks) : 0.0; }
};

// Splits both strings into code-length blocks, padding the last partial block
// with public random bits, and reconciles each block. `senders` is the number
// of codeword shares that make up each u.
inline ReconciliationReport reconcile_key(const CssPair& pair, std::span<const std::uint8_t> v,
                                          std::span<const std::uint8_t> v_noisy, int senders, RandomSource& rand) {
  if (v.size() != v_noisy.size()) throw DomainError("sender and receiver strings differ in length");
  const auto n = pair.block_length();
  ReconciliationReport rep;
  Bits a(v.begin(), v.end());
  Bits b(v_noisy.begin(), v_noisy.end());
  if (a.size() % n) {
    rep.padding = n - a.size() % n;
    rep.padding_bits = rand.bits(rep.padding);
    a.insert(a.end(), rep.padding_bits.begin(), rep.padding_bits.end());
    b.insert(b.end(), rep.padding_bits.begin(), rep.padding_bits.end());
  }
  for (std::size_t off = 0; off < a.size(); off += n) {
    const auto u = joint_codeword(pair.c1(), senders, rand);
    auto r = reconcile(pair, std::span(a).subspan(off, n), std::span(b).subspan(off, n), u);
    ++rep.blocks;
    if (!r.key_bob) {
      ++rep.failed;
    } else {
      rep.agreed += r.agree() ? 1 : 0;
      rep.key_alice.insert(rep.key_alice.end(), r.key_alice.begin(), r.key_alice.end());
      rep.key_bob.insert(rep.key_bob.end(), r.key_bob->begin(), r.key_bob->end());
    }
    rep.details.push_back(std::move(r));
  }
  return rep;
}

// One-time pad: XOR with key material that is consumed as it is used.
inline Bits otp_apply(std::span<const std::uint8_t> message, std::span<const std::uint8_t> key) {
  if (key.size() < message.size()) throw KeyExhaustedError("not enough key material for the message");
  return xor_bits(message, key.first(message.size()));
}

// Final-key store; every bit is handed out at most once.
class KeyPad {
 public:
  KeyPad() = default;
  explicit KeyPad(Bits key) : key_(std::move(key)) {}

  // Appends block keys in order.
  explicit KeyPad(std::span<const Bits> block_keys) {
    for (const auto& k : block_keys) key_.insert(key_.end(), k.begin(), k.end());
  }

  std::size_t remaining() const noexcept { return key_.size() - used_; }

  Bits take(std::size_t n) {
    if (n > remaining()) throw KeyExhaustedError("refusing to reuse one-time-pad key material");
    Bits out(key_.begin() + static_cast<std::ptrdiff_t>(used_),
             key_.begin() + static_cast<std::ptrdiff_t>(used_ + n));
    used_ += n;
    return out;
  }

 private:
  Bits key_;
  std::size_t used_ = 0;
};

// Encrypt and decrypt are the same XOR; each call consumes fresh key.
inline Bits otp_send(std::span<const std::uint8_t> message, KeyPad& pad) {
  return otp_apply(message, pad.take(message.size()));
}

inline Bits otp_receive(std::span<const std::uint8_t> ciphertext, KeyPad& pad) { return otp_send(ciphertext, pad); }

}  // namespace qss
