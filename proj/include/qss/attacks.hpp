#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qss/bits.hpp"
#include "qss/channel.hpp"
#include "qss/config.hpp"
#include "qss/errors.hpp"
#include "qss/protocol.hpp"
#include "qss/qubit.hpp"
#include "qss/random.hpp"

namespace qss {

// Result of an interception: the attacker's per-position reading of the
// block and the qubits forwarded in its place.
struct Interception {
  Bits readout;              // nN measured values
  std::vector<Qubit> resent;
};

// Reading of a recovered secret against the truth. `hidden_*` restricts the
// comparison to entries the target covered with H; those are the entries the
// Hadamard step protects, so their accuracy is the no-information baseline.
struct RecoveryScore {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t hidden_total = 0;
  std::size_t hidden_correct = 0;

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  std::optional<double> hidden_accuracy() const {
    if (!hidden_total) return std::nullopt;
    return static_cast<double>(hidden_correct) / static_cast<double>(hidden_total);
  }
};

// Measures every qubit of `block` in the basis given by the XOR of the known
// B strings and strips the known A contributions. Whatever remains is the
// attacker's estimate of the unknown senders' combined a-bit per position.
inline Interception intercept_with_known(const ProtocolConfig& cfg, std::span<const PartySecrets> known,
                                         const QubitBlock& block, RandomSource& rand) {
  if (block.qubits.size() != cfg.qubits()) throw ConfigError("block", "length is not nN");
  Interception out;
  out.readout.resize(block.qubits.size());
  out.resent.resize(block.qubits.size());
  for (std::size_t k = 0; k < block.qubits.size(); ++k) {
    std::uint8_t b = 0;
    std::uint8_t a = 0;
    for (const auto& s : known) {
      b ^= s.b_at(cfg, k);
      a ^= s.a_at(cfg, k);
    }
    const Basis basis = basis_from_bit(b);
    const auto outcome = measure(block.qubits[k], basis, rand);
    out.resent[k] = encode(outcome, b);
    out.readout[k] = outcome ^ a;
  }
  return out;
}

// Turns per-position estimates into an estimate of a sender's A string. For
// variant B one a-bit covers a whole block, so the block votes (ties go to
// the first position).
inline Bits positions_to_a_string(const ProtocolConfig& cfg, std::span<const std::uint8_t> per_position) {
  if (cfg.variant != Variant::B) return Bits(per_position.begin(), per_position.end());
  Bits out(cfg.N);
  for (std::size_t j = 0; j < cfg.N; ++j) {
    int ones = 0;
    for (int l = 0; l < cfg.n; ++l) ones += per_position[position(j, static_cast<std::size_t>(l), cfg.n)];
    const int zeros = cfg.n - ones;
    out[j] = ones == zeros ? per_position[position(j, 0, cfg.n)] : static_cast<std::uint8_t>(ones > zeros);
  }
  return out;
}

// Compares a recovered A string with the target's. `hadamard_applied` says
// whether the target ran the H step at all.
inline RecoveryScore score_recovery(const ProtocolConfig& cfg, std::span<const std::uint8_t> recovered,
                                    const PartySecrets& target, bool hadamard_applied) {
  if (recovered.size() != target.a_bits.size()) throw DomainError("recovered string has the wrong length");
  RecoveryScore s;
  for (std::size_t i = 0; i < recovered.size(); ++i) {
    const bool ok = recovered[i] == target.a_bits[i];
    ++s.total;
    s.correct += ok;
    // The b-bit that governs the same qubits as a_bits[i].
    std::uint8_t b;
    if (cfg.variant == Variant::Main) b = target.b_bits[i];
    else if (cfg.variant == Variant::A) b = target.b_bits[block_of(i, cfg.n)];
    else b = target.b_bits[i];
    if (hadamard_applied && b) {
      ++s.hidden_total;
      s.hidden_correct += ok;
    }
  }
  return s;
}

struct InsiderResult {
  Bits recovered;           // estimate of the target's A string
  std::vector<Qubit> resent;
};

// Case I: Alice1 intercepts the block leaving Alice2 and measures each qubit
// in the basis it was prepared in.
inline InsiderResult insider_case1(const ProtocolConfig& cfg, const PartySecrets& alice1,
                                   const QubitBlock& intercepted, RandomSource& rand) {
  if (alice1.alice != 1) throw DomainError("case I interceptor must be Alice1");
  auto ic = intercept_with_known(cfg, std::span<const PartySecrets>(&alice1, 1), intercepted, rand);
  return {positions_to_a_string(cfg, ic.readout), std::move(ic.resent)};
}

// Case II: senders before i0 pool their strings; one of them intercepts the
// block leaving Alice i0.
inline InsiderResult insider_case2(const ProtocolConfig& cfg, int i0, std::span<const PartySecrets> colluders,
                                   const QubitBlock& intercepted, RandomSource& rand) {
  if (i0 < 3 || i0 > cfg.m) throw DomainError("case II target must satisfy 3 <= i0 <= m");
  for (const auto& c : colluders)
    if (c.alice < 1 || c.alice >= i0) throw DomainError("colluder outside 1..i0-1");
  auto ic = intercept_with_known(cfg, colluders, intercepted, rand);
  return {positions_to_a_string(cfg, ic.readout), std::move(ic.resent)};
}

// Interception after the basis strings went public too early. With the
// announced strings the attacker reads every combined a-bit exactly and
// forwards an undisturbed block. Without them (`announced` empty) it can
// only guess bases.
inline Interception ordering_violation_attack(const ProtocolConfig& cfg, std::span<const Bits> announced,
                                              const QubitBlock& intercepted, RandomSource& rand) {
  if (intercepted.qubits.size() != cfg.qubits()) throw ConfigError("block", "length is not nN");
  Interception out;
  out.readout.resize(intercepted.qubits.size());
  out.resent.resize(intercepted.qubits.size());
  for (std::size_t k = 0; k < intercepted.qubits.size(); ++k) {
    const Basis basis = announced.empty() ? basis_from_bit(rand.bit()) : required_basis(cfg, announced, k);
    const auto outcome = measure(intercepted.qubits[k], basis, rand);
    out.readout[k] = outcome;
    out.resent[k] = encode(outcome, to_bit(basis));
  }
  return out;
}

// Key guess from per-position knowledge over the protocol's key slots.
// Positions without knowledge are filled with coin flips.
inline Bits guess_key(const ProtocolConfig& cfg, std::span<const Outcome> per_position,
                      const std::vector<std::vector<std::size_t>>& slots, RandomSource& rand) {
  const std::size_t len = slots.empty() ? 0 : slots[0].size();
  Bits key(len, 0);
  for (std::size_t l = 0; l < slots.size(); ++l) {
    for (std::size_t i = 0; i < len; ++i) {
      const auto& g = per_position[position(slots[l][i], l, cfg.n)];
      key[i] ^= g ? *g : rand.bit();
    }
  }
  return key;
}

inline double agreement(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DomainError("agreement of strings with different lengths");
  if (a.empty()) return 0.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace qss
