#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qss/attacks.hpp"
#include "qss/channel.hpp"
#include "qss/config.hpp"
#include "qss/protocol.hpp"
#include "qss/settings.hpp"

namespace qss {

// Fixed inputs for reproducing a known run. Anything left empty is drawn
// from the run's random source.
struct RunOverrides {
  std::optional<std::vector<PartySecrets>> secrets;
  std::optional<std::vector<std::size_t>> check_blocks;  // 0-based block indices
};

namespace detail {

inline void log_losses(Transcript& t, const std::string& party, std::span<const std::size_t> positions) {
  if (positions.empty()) return;
  t.log("lost", party, {{"positions", join_positions(positions)}});
}

// A sender-to-sender hop. Remove-strategy losses stay lost for the rest of
// the chain and are announced by the receiving sender.
inline void inner_hop(Transcript& t, QubitBlock& block, std::vector<bool>& lost, const ChannelModel& ch,
                      RandomSource& rand, int receiving_alice) {
  auto out = transmit(block.qubits, ch, rand, nullptr, /*attach_adversary=*/false);
  std::vector<std::size_t> newly_lost;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k]) {
      block.qubits[k] = *out[k];
    } else if (!lost[k]) {
      lost[k] = true;
      newly_lost.push_back(k);
    }
  }
  log_losses(t, alice_name(receiving_alice), newly_lost);
}

inline void log_intercept(Transcript& t, std::span<const EveObservation> records, std::size_t nbits) {
  if (records.empty()) return;
  std::string bases(nbits, 'x');
  std::string bits(nbits, 'x');
  for (const auto& r : records) {
    bases[r.position] = r.basis == Basis::Z ? '0' : '1';
    bits[r.position] = r.outcome ? '1' : '0';
  }
  t.log("intercept", "eve", {{"bases", bases}, {"bits", bits}});
}

}  // namespace detail

// Runs one full protocol instance: preparation, the encoding chain, the
// final hop to the receivers, acknowledgment, basis announcement,
// measurement, the check and raw-key derivation. The channel acts on the
// final hop (and on the sender chain when `all_hops` is set). Deterministic in
// (cfg.seed, channel, overrides).
inline Transcript run_protocol(const ProtocolConfig& cfg, const ChannelModel& ch, const RunOverrides& ov = {}) {
  validate(cfg);
  validate(ch, cfg.m);

  RandomSource rand(cfg.seed);
  Transcript t(cfg);
  t.log("config", "-", describe(cfg, ch));

  std::vector<PartySecrets> secrets = ov.secrets ? *ov.secrets : generate_secrets(cfg, rand);
  if (secrets.size() != static_cast<std::size_t>(cfg.m)) throw ConfigError("secrets", "need one entry per sender");
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    if (secrets[i].alice != static_cast<int>(i) + 1) throw ConfigError("secrets", "entries must be ordered by sender");
    check_secrets(cfg, secrets[i]);
  }

  const auto& adv_cfg = ch.adversary;
  if (adv_cfg.kind != AdversaryKind::None) {
    t.adversary.emplace();
    t.adversary->kind = std::string(to_string(adv_cfg.kind));
  }

  const std::size_t nN = cfg.qubits();
  std::vector<bool> lost(nN, false);

  // M1-M3: the encoding chain.
  QubitBlock block = m1_prepare(secrets[0], cfg);
  for (int i = 2; i <= cfg.m; ++i) {
    if (ch.all_hops) detail::inner_hop(t, block, lost, ch, rand, i);
    block = mi_encode(std::move(block), secrets[static_cast<std::size_t>(i - 1)], cfg, !cfg.omits_hadamard(i));

    const bool case1 = adv_cfg.kind == AdversaryKind::InsiderCaseI && i == 2;
    const bool case2 = adv_cfg.kind == AdversaryKind::InsiderCaseII && i == adv_cfg.target;
    if (case1 || case2) {
      InsiderResult r;
      if (case1) {
        r = insider_case1(cfg, secrets[0], block, rand);
      } else {
        std::vector<PartySecrets> pool;
        for (int c : adv_cfg.colluders) pool.push_back(secrets[static_cast<std::size_t>(c - 1)]);
        r = insider_case2(cfg, i, pool, block, rand);
      }
      block.qubits = std::move(r.resent);
      const auto& victim = secrets[static_cast<std::size_t>(i - 1)];
      const auto score = score_recovery(cfg, r.recovered, victim, !cfg.omits_hadamard(i));
      t.adversary->intercepted = nN;
      t.adversary->recovered_a = r.recovered;
      t.adversary->accuracy = score.accuracy();
      t.adversary->hidden_accuracy = score.hidden_accuracy();
      t.log("insider", alice_name(case1 ? 1 : adv_cfg.colluders.front()),
            {{"target", alice_name(i)}, {"recovered", to_string(r.recovered)}});
    }
  }
  t.log("send", alice_name(cfg.m), {{"qubits", std::to_string(nN)}, {"to", "bobs"}});

  // Early announcement: the attack the ordering rule exists for.
  std::optional<Interception> early;
  if (adv_cfg.kind == AdversaryKind::OrderingViolation) {
    try {
      for (const auto& s : secrets) announce_bases(t, s);
    } catch (const ProtocolOrderError& e) {
      t.abort(std::string("protocol-order violation: ") + e.what());
      return t;
    }
    early = ordering_violation_attack(cfg, t.announced_b, block, rand);
    block.qubits = early->resent;
    t.adversary->intercepted = nN;
    t.log("intercept", "eve", {{"bits", to_string(early->readout)}});
  }

  // Final hop, then M4.
  std::vector<EveObservation> eve_records;
  const auto received = transmit(block.qubits, ch, rand, &eve_records);
  std::vector<std::optional<Qubit>> arrived(nN);
  std::vector<std::size_t> final_lost;
  for (std::size_t k = 0; k < nN; ++k) {
    if (lost[k]) continue;
    if (!received[k]) final_lost.push_back(k);
    else arrived[k] = *received[k];
  }
  const auto per_bob = distribute<std::optional<Qubit>>(arrived, cfg.n);
  for (std::size_t l = 0; l < per_bob.size(); ++l) {
    auto& rec = t.bobs[l];
    rec.lost.assign(cfg.N, false);
    std::vector<std::size_t> bob_lost;
    for (std::size_t j = 0; j < cfg.N; ++j) {
      if (!per_bob[l][j]) {
        rec.lost[j] = true;
        const auto k = position(j, l, cfg.n);
        if (!lost[k]) bob_lost.push_back(k);
      }
    }
    detail::log_losses(t, bob_name(l), bob_lost);
    if (!cfg.quantum_memory) measure_on_arrival(t, l, per_bob[l], rand);
    record_ack(t, l);
  }

  // M5.
  if (!t.all_announced()) {
    for (const auto& s : secrets) announce_bases(t, s);
  }

  // M6.
  for (std::size_t l = 0; l < per_bob.size(); ++l) {
    if (cfg.quantum_memory) m6_measure(t, l, per_bob[l], rand);
    else sift(t, l);
  }
  if (t.adversary && adv_cfg.external_intercept()) {
    detail::log_intercept(t, eve_records, nN);
    t.adversary->intercepted = eve_records.size();
  }

  // M7, M8.
  m7_check(t, secrets, rand, ov.check_blocks);
  if (t.abort_reason) return t;
  m8_raw_key(t);
  alice_raw_key(t, secrets);

  if (t.adversary && (adv_cfg.external_intercept() || early)) {
    Outcomes knowledge(nN);
    if (early) {
      for (std::size_t k = 0; k < nN; ++k) knowledge[k] = early->readout[k];
    } else {
      // After the announcements Eve knows which of its guesses used the
      // right basis; those readings are hers, the rest is noise.
      for (const auto& r : eve_records)
        if (r.basis == required_basis(cfg, t.announced_b, r.position)) knowledge[r.position] = r.outcome;
    }
    const auto slots = key_slots(cfg, t.bobs, t.check->blocks);
    auto guess = guess_key(cfg, knowledge, slots, rand);
    t.adversary->accuracy = agreement(guess, *t.alice_key);
    t.adversary->key_guess = std::move(guess);
    t.log("key_guess", "eve", {{"bits", to_string(*t.adversary->key_guess)}});
  }
  return t;
}

}  // namespace qss
