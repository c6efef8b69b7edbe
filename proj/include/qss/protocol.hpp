#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qss/bits.hpp"
#include "qss/config.hpp"
#include "qss/errors.hpp"
#include "qss/qubit.hpp"
#include "qss/random.hpp"

namespace qss {

// Positions are 0-based internally: global position k = n*j + l belongs to
// receiver l (0-based) and block j. Every external format is 1-based.
constexpr std::size_t bob_of(std::size_t k, int n) noexcept { return k % static_cast<std::size_t>(n); }
constexpr std::size_t block_of(std::size_t k, int n) noexcept { return k / static_cast<std::size_t>(n); }
constexpr std::size_t position(std::size_t block, std::size_t bob, int n) noexcept {
  return block * static_cast<std::size_t>(n) + bob;
}

// Random strings of one sender.
struct PartySecrets {
  int alice = 1;  // 1-based
  Bits a_bits;
  Bits b_bits;
  // Variant B, Alice1 only: the nN-bit sharing of a_bits (XOR over each
  // n-bit group equals the matching a_bits entry).
  Bits a_expansion;

  // The value-flip bit this sender applies at global position k.
  std::uint8_t a_at(const ProtocolConfig& cfg, std::size_t k) const {
    if (cfg.variant != Variant::B) return a_bits[k];
    return alice == 1 ? a_expansion[k] : a_bits[block_of(k, cfg.n)];
  }

  // The basis bit this sender applies at global position k.
  std::uint8_t b_at(const ProtocolConfig& cfg, std::size_t k) const {
    return cfg.variant == Variant::Main ? b_bits[k] : b_bits[block_of(k, cfg.n)];
  }
};

inline std::size_t a_length(const ProtocolConfig& cfg) {
  return cfg.variant == Variant::B ? cfg.N : cfg.qubits();
}

inline std::size_t b_length(const ProtocolConfig& cfg) {
  return cfg.variant == Variant::Main ? cfg.qubits() : cfg.N;
}

// Resamples the expansion of `a` uniformly among the 2^(n-1) assignments with
// the right parity per block.
inline Bits expand_shares(std::span<const std::uint8_t> a, int n, RandomSource& rand) {
  Bits out;
  out.reserve(a.size() * static_cast<std::size_t>(n));
  for (auto aj : a) {
    std::uint8_t acc = 0;
    for (int l = 0; l + 1 < n; ++l) {
      const auto s = rand.bit();
      acc ^= s;
      out.push_back(s);
    }
    out.push_back(acc ^ aj);
  }
  return out;
}

inline void check_secrets(const ProtocolConfig& cfg, const PartySecrets& s) {
  const std::string who = "secrets.alice" + std::to_string(s.alice);
  if (s.a_bits.size() != a_length(cfg)) throw ConfigError(who + ".a_bits", "wrong length");
  if (s.b_bits.size() != b_length(cfg)) throw ConfigError(who + ".b_bits", "wrong length");
  if (cfg.variant == Variant::B && s.alice == 1) {
    if (s.a_expansion.size() != cfg.qubits()) throw ConfigError(who + ".a_expansion", "wrong length");
    for (std::size_t j = 0; j < cfg.N; ++j) {
      std::uint8_t p = 0;
      for (int l = 0; l < cfg.n; ++l) p ^= s.a_expansion[position(j, static_cast<std::size_t>(l), cfg.n)];
      if (p != s.a_bits[j]) throw ConfigError(who + ".a_expansion", "parity does not match a_bits");
    }
  }
}

inline std::vector<PartySecrets> generate_secrets(const ProtocolConfig& cfg, RandomSource& rand) {
  std::vector<PartySecrets> out;
  out.reserve(static_cast<std::size_t>(cfg.m));
  for (int i = 1; i <= cfg.m; ++i) {
    PartySecrets s;
    s.alice = i;
    s.a_bits = rand.bits(a_length(cfg));
    s.b_bits = cfg.omits_hadamard(i) ? Bits(b_length(cfg), 0) : rand.bits(b_length(cfg));
    if (cfg.variant == Variant::B && i == 1) s.a_expansion = expand_shares(s.a_bits, cfg.n, rand);
    out.push_back(std::move(s));
  }
  return out;
}

struct QubitBlock {
  std::vector<Qubit> qubits;
  int origin = 1;  // sender that emitted the block
};

// M1: Alice1 prepares |psi_{a_k b_k}> at every position.
inline QubitBlock m1_prepare(const PartySecrets& alice1, const ProtocolConfig& cfg) {
  check_secrets(cfg, alice1);
  QubitBlock block;
  block.origin = 1;
  block.qubits.reserve(cfg.qubits());
  for (std::size_t k = 0; k < cfg.qubits(); ++k)
    block.qubits.push_back(encode(alice1.a_at(cfg, k), alice1.b_at(cfg, k)));
  return block;
}

// M2/M3: sigma_1 where the sender's a-bit is 1, then H where their b-bit is 1.
// With hadamard_step=false the sender runs the degraded protocol.
inline QubitBlock mi_encode(QubitBlock block, const PartySecrets& alice, const ProtocolConfig& cfg,
                            bool hadamard_step = true) {
  check_secrets(cfg, alice);
  if (block.qubits.size() != cfg.qubits()) throw ConfigError("block", "length is not nN");
  for (std::size_t k = 0; k < block.qubits.size(); ++k) {
    auto& q = block.qubits[k];
    if (alice.a_at(cfg, k)) q = apply_sigma1(q);
    if (hadamard_step && alice.b_at(cfg, k)) q = apply_hadamard(q);
  }
  block.origin = alice.alice;
  return block;
}

// M3: receiver l gets positions l, n+l, 2n+l, ... in order.
template <typename T>
std::vector<std::vector<T>> distribute(std::span<const T> items, int n) {
  std::vector<std::vector<T>> out(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < items.size(); ++k) out[bob_of(k, n)].push_back(items[k]);
  return out;
}

inline std::vector<std::vector<Qubit>> m3_distribute(const QubitBlock& block, const ProtocolConfig& cfg) {
  if (block.qubits.size() != cfg.qubits()) throw ConfigError("block", "length is not nN");
  return distribute<Qubit>(block.qubits, cfg.n);
}

// XOR of every sender's a-bit at position k: the value an honest receiver reads.
inline std::uint8_t combined_value(const ProtocolConfig& cfg, std::span<const PartySecrets> secrets,
                                   std::size_t k) {
  std::uint8_t v = 0;
  for (const auto& s : secrets) v ^= s.a_at(cfg, k);
  return v;
}

// Measurement basis at position k from the announced B strings (all m).
inline Basis required_basis(const ProtocolConfig& cfg, std::span<const Bits> announced, std::size_t k) {
  const std::size_t idx = cfg.variant == Variant::Main ? k : block_of(k, cfg.n);
  std::uint8_t b = 0;
  for (const auto& s : announced) b ^= s[idx];
  return basis_from_bit(b);
}

// ---------------------------------------------------------------------------
// Transcript

struct Event {
  std::uint64_t seq = 0;
  std::string kind;
  std::string party;
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string* field(std::string_view key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return &v;
    return nullptr;
  }
};

inline std::string alice_name(int i) { return "alice" + std::to_string(i); }
inline std::string bob_name(std::size_t l) { return "bob" + std::to_string(l + 1); }

// Everything one receiver did with its N qubits. Indices are per-receiver
// (block j).
struct BobRecord {
  Bits bases;            // basis bit used for each measurement
  Outcomes outcomes;     // nullopt: lost, or discarded at sifting
  std::vector<bool> lost;
  std::size_t sifted_out = 0;
};

struct CheckOutcome {
  std::vector<std::size_t> blocks;  // sorted, 0-based
  std::size_t compared = 0;
  std::size_t disagreements = 0;
  bool passed = true;

  double rate() const {
    return compared == 0 ? 0.0 : static_cast<double>(disagreements) / static_cast<double>(compared);
  }
};

// What an attacker attached to the run ended up knowing.
struct AdversarySummary {
  std::string kind;
  std::size_t intercepted = 0;
  std::optional<Bits> key_guess;    // external attackers: guess of the raw key
  std::optional<Bits> recovered_a;  // insiders: estimate of the target's A string
  double accuracy = 0.0;
  std::optional<double> hidden_accuracy;
};

struct Transcript {
  ProtocolConfig config;
  std::vector<Event> events;
  std::uint64_t next_seq = 1;

  std::vector<std::optional<std::uint64_t>> ack_seq;       // per receiver
  std::vector<std::optional<std::uint64_t>> announce_seq;  // per sender
  std::vector<Bits> announced_b;                           // per sender
  std::vector<BobRecord> bobs;
  std::optional<CheckOutcome> check;
  std::vector<Bits> contributions;  // per receiver, aligned with raw_key
  std::optional<Bits> raw_key;
  std::optional<Bits> alice_key;
  std::optional<std::string> abort_reason;
  std::optional<AdversarySummary> adversary;
  bool invalid = false;

  explicit Transcript(ProtocolConfig cfg) : config(std::move(cfg)) {
    ack_seq.resize(static_cast<std::size_t>(config.n));
    announce_seq.resize(static_cast<std::size_t>(config.m));
    announced_b.resize(static_cast<std::size_t>(config.m));
    bobs.resize(static_cast<std::size_t>(config.n));
  }

  Event& log(std::string kind, std::string party,
             std::vector<std::pair<std::string, std::string>> fields = {}) {
    events.push_back(Event{next_seq++, std::move(kind), std::move(party), std::move(fields)});
    return events.back();
  }

  bool all_acknowledged() const {
    return std::all_of(ack_seq.begin(), ack_seq.end(), [](const auto& s) { return s.has_value(); });
  }

  bool all_announced() const {
    return std::all_of(announce_seq.begin(), announce_seq.end(), [](const auto& s) { return s.has_value(); });
  }

  // Every announcement comes after every acknowledgment.
  bool ordering_ok() const {
    std::uint64_t last_ack = 0;
    for (const auto& a : ack_seq) {
      if (!a) return false;
      last_ack = std::max(last_ack, *a);
    }
    for (const auto& s : announce_seq)
      if (s && *s <= last_ack) return false;
    return true;
  }

  void abort(std::string reason) {
    abort_reason = std::move(reason);
    raw_key.reset();
    log("abort", "-", {{"reason", *abort_reason}});
  }
};

// M4.
inline void record_ack(Transcript& t, std::size_t bob) {
  if (t.ack_seq.at(bob)) throw StateError(bob_name(bob) + " already acknowledged");
  const auto& bob_rec = t.bobs.at(bob);
  std::size_t received = t.config.N;
  for (bool l : bob_rec.lost) received -= l ? 1 : 0;
  t.ack_seq[bob] = t.log("ack", bob_name(bob), {{"received", std::to_string(received)}}).seq;
}

// M5. Throws ProtocolOrderError (and marks the run invalid) when some
// receiver has not acknowledged yet and ordering is enforced.
inline void announce_bases(Transcript& t, const PartySecrets& alice) {
  const auto idx = static_cast<std::size_t>(alice.alice - 1);
  if (t.announce_seq.at(idx)) throw StateError(alice_name(alice.alice) + " already announced");
  if (!t.all_acknowledged()) {
    if (t.config.enforce_ordering) {
      t.invalid = true;
      throw ProtocolOrderError(alice_name(alice.alice) +
                               " announced its basis string before every receiver acknowledged");
    }
  }
  t.announced_b[idx] = alice.b_bits;
  t.announce_seq[idx] = t.log("announce", alice_name(alice.alice), {{"b", to_string(alice.b_bits)}}).seq;
}

// M6 with quantum memory: receiver `bob` measures each stored qubit in the
// basis given by the XOR of all announced B strings.
inline void m6_measure(Transcript& t, std::size_t bob, std::span<const std::optional<Qubit>> received,
                       RandomSource& rand) {
  const auto& cfg = t.config;
  if (!t.all_announced()) throw StateError("measurement before all basis strings were announced");
  if (received.size() != cfg.N) throw ConfigError("received", "receiver sequence length is not N");
  auto& rec = t.bobs.at(bob);
  rec.bases.assign(cfg.N, 0);
  rec.outcomes.assign(cfg.N, std::nullopt);
  rec.lost.resize(cfg.N, false);
  for (std::size_t j = 0; j < cfg.N; ++j) {
    const Basis basis = required_basis(cfg, t.announced_b, position(j, bob, cfg.n));
    rec.bases[j] = to_bit(basis);
    if (received[j]) rec.outcomes[j] = measure(*received[j], basis, rand);
  }
  t.log("measure", bob_name(bob), {{"bases", to_string(rec.bases)}, {"bits", to_string(rec.outcomes)}});
}

// Without quantum memory the receiver measures on arrival in guessed bases.
inline void measure_on_arrival(Transcript& t, std::size_t bob, std::span<const std::optional<Qubit>> received,
                               RandomSource& rand) {
  const auto& cfg = t.config;
  if (received.size() != cfg.N) throw ConfigError("received", "receiver sequence length is not N");
  auto& rec = t.bobs.at(bob);
  rec.bases.assign(cfg.N, 0);
  rec.outcomes.assign(cfg.N, std::nullopt);
  rec.lost.resize(cfg.N, false);
  for (std::size_t j = 0; j < cfg.N; ++j) {
    rec.bases[j] = rand.bit();
    if (received[j]) rec.outcomes[j] = measure(*received[j], basis_from_bit(rec.bases[j]), rand);
  }
}

// Sifting after the announcements: the receiver publishes its guessed bases
// and drops every outcome whose basis disagrees with the required one.
inline void sift(Transcript& t, std::size_t bob) {
  const auto& cfg = t.config;
  if (!t.all_announced()) throw StateError("sifting before all basis strings were announced");
  auto& rec = t.bobs.at(bob);
  t.log("guess", bob_name(bob), {{"bases", to_string(rec.bases)}});
  for (std::size_t j = 0; j < cfg.N; ++j) {
    if (!rec.outcomes[j]) continue;
    if (basis_from_bit(rec.bases[j]) != required_basis(cfg, t.announced_b, position(j, bob, cfg.n))) {
      rec.outcomes[j].reset();
      ++rec.sifted_out;
    }
  }
  t.log("measure", bob_name(bob), {{"bases", to_string(rec.bases)}, {"bits", to_string(rec.outcomes)}});
}

inline std::vector<std::size_t> choose_check_blocks(const ProtocolConfig& cfg, RandomSource& rand) {
  std::vector<std::size_t> all(cfg.N);
  for (std::size_t j = 0; j < cfg.N; ++j) all[j] = j;
  const std::size_t count = check_block_count(cfg);
  for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + rand.below(cfg.N - i)]);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

inline std::string join_positions(std::span<const std::size_t> zero_based) {
  std::string s;
  for (std::size_t i = 0; i < zero_based.size(); ++i) {
    if (i) s.push_back(',');
    s += std::to_string(zero_based[i] + 1);
  }
  return s;
}

// M7. Checks every position of the selected blocks. `forced_blocks` replaces
// the random selection (used for fixed worked examples).
inline const CheckOutcome& m7_check(Transcript& t, std::span<const PartySecrets> secrets, RandomSource& rand,
                                    std::optional<std::vector<std::size_t>> forced_blocks = std::nullopt) {
  const auto& cfg = t.config;
  for (const auto& rec : t.bobs)
    if (rec.outcomes.size() != cfg.N) throw StateError("check before every receiver measured");

  CheckOutcome out;
  out.blocks = forced_blocks ? std::move(*forced_blocks) : choose_check_blocks(cfg, rand);
  std::sort(out.blocks.begin(), out.blocks.end());
  for (auto j : out.blocks)
    if (j >= cfg.N) throw ConfigError("check.blocks", "block index out of range");

  std::vector<std::size_t> positions;
  for (auto j : out.blocks)
    for (int l = 0; l < cfg.n; ++l) positions.push_back(position(j, static_cast<std::size_t>(l), cfg.n));
  t.log("check_select", "alices", {{"positions", join_positions(positions)}});

  for (const auto& s : secrets) {
    Bits revealed;
    for (auto k : positions) revealed.push_back(s.a_at(cfg, k));
    t.log("reveal", alice_name(s.alice), {{"bits", to_string(revealed)}});
  }
  for (std::size_t l = 0; l < static_cast<std::size_t>(cfg.n); ++l) {
    Outcomes revealed;
    for (auto j : out.blocks) revealed.push_back(t.bobs[l].outcomes[j]);
    t.log("reveal", bob_name(l), {{"bits", to_string(revealed)}});
  }
  for (auto k : positions) {
    const auto& o = t.bobs[bob_of(k, cfg.n)].outcomes[block_of(k, cfg.n)];
    if (!o) continue;
    ++out.compared;
    if (*o != combined_value(cfg, secrets, k)) ++out.disagreements;
  }
  out.passed = out.rate() <= cfg.qber_abort_threshold;
  t.log("check", "-",
        {{"compared", std::to_string(out.compared)},
         {"disagreements", std::to_string(out.disagreements)},
         {"result", out.passed ? "pass" : "fail"}});
  t.check = std::move(out);
  if (!t.check->passed) t.abort("error rate above threshold");
  return *t.check;
}

// Per receiver, the blocks whose outcome can enter the key: not checked, not
// lost, not sifted out. Every list is truncated to the shortest one, and key
// bit i combines the i-th entry of each receiver. With quantum memory and no
// losses these are the unchecked blocks themselves.
inline std::vector<std::vector<std::size_t>> key_slots(const ProtocolConfig& cfg, std::span<const BobRecord> bobs,
                                                       std::span<const std::size_t> check_blocks) {
  std::vector<bool> checked(cfg.N, false);
  for (auto j : check_blocks) checked[j] = true;
  std::vector<std::vector<std::size_t>> slots(static_cast<std::size_t>(cfg.n));
  std::size_t shortest = cfg.N;
  for (std::size_t l = 0; l < slots.size(); ++l) {
    for (std::size_t j = 0; j < cfg.N; ++j)
      if (!checked[j] && bobs[l].outcomes[j]) slots[l].push_back(j);
    shortest = std::min(shortest, slots[l].size());
  }
  for (auto& s : slots) s.resize(shortest);
  return slots;
}

// M8: raw key bit i = XOR over receivers of their i-th usable outcome. Each
// receiver's contribution is logged separately; how the receivers combine
// them without exposing individual bits is outside the protocol
// (joint-computation step).
inline const Bits& m8_raw_key(Transcript& t) {
  const auto& cfg = t.config;
  if (!t.check || !t.check->passed || t.abort_reason) throw StateError("raw key requested before a passed check");
  const auto slots = key_slots(cfg, t.bobs, t.check->blocks);
  const std::size_t len = slots.empty() ? 0 : slots[0].size();
  Bits key(len, 0);
  t.contributions.assign(static_cast<std::size_t>(cfg.n), Bits{});
  for (std::size_t l = 0; l < slots.size(); ++l) {
    for (std::size_t i = 0; i < len; ++i) {
      const auto bit = *t.bobs[l].outcomes[slots[l][i]];
      t.contributions[l].push_back(bit);
      key[i] ^= bit;
    }
    std::vector<std::size_t> pos;
    for (auto j : slots[l]) pos.push_back(position(j, l, cfg.n));
    t.log("contribution", bob_name(l), {{"positions", join_positions(pos)}, {"bits", to_string(t.contributions[l])}});
  }
  t.raw_key = std::move(key);
  t.log("raw_key", "bobs", {{"bits", to_string(*t.raw_key)}, {"step", "joint-computation"}});
  return *t.raw_key;
}

// The senders' side of the raw key, computed from their own strings over the
// same key slots.
inline const Bits& alice_raw_key(Transcript& t, std::span<const PartySecrets> secrets) {
  const auto& cfg = t.config;
  if (!t.check || !t.raw_key) throw StateError("sender key requested before the raw key");
  const auto slots = key_slots(cfg, t.bobs, t.check->blocks);
  Bits key(t.raw_key->size(), 0);
  for (std::size_t l = 0; l < slots.size(); ++l)
    for (std::size_t i = 0; i < key.size(); ++i) key[i] ^= combined_value(cfg, secrets, position(slots[l][i], l, cfg.n));
  t.alice_key = std::move(key);
  t.log("alice_key", "alices", {{"bits", to_string(*t.alice_key)}});
  return *t.alice_key;
}

}  // namespace qss
