#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qss/errors.hpp"
#include "qss/qubit.hpp"
#include "qss/random.hpp"

namespace qss {

enum class LossStrategy { Remove, Substitute };

enum class AdversaryKind {
  None,
  InterceptResendAll,
  InterceptResendFraction,
  OrderingViolation,
  InsiderCaseI,
  InsiderCaseII,
};

constexpr std::string_view to_string(AdversaryKind k) noexcept {
  switch (k) {
    case AdversaryKind::None: return "none";
    case AdversaryKind::InterceptResendAll: return "intercept_resend_all";
    case AdversaryKind::InterceptResendFraction: return "intercept_resend_fraction";
    case AdversaryKind::OrderingViolation: return "ordering_violation";
    case AdversaryKind::InsiderCaseI: return "insider_case1";
    case AdversaryKind::InsiderCaseII: return "insider_case2";
  }
  return "none";
}

inline AdversaryKind parse_adversary(std::string_view s) {
  for (auto k : {AdversaryKind::None, AdversaryKind::InterceptResendAll, AdversaryKind::InterceptResendFraction,
                 AdversaryKind::OrderingViolation, AdversaryKind::InsiderCaseI, AdversaryKind::InsiderCaseII})
    if (s == to_string(k)) return k;
  throw ConfigError("channel.adversary", "unknown adversary '" + std::string(s) + "'");
}

constexpr std::string_view to_string(LossStrategy s) noexcept {
  return s == LossStrategy::Remove ? "remove" : "substitute";
}

inline LossStrategy parse_loss_strategy(std::string_view s) {
  if (s == "remove") return LossStrategy::Remove;
  if (s == "substitute") return LossStrategy::Substitute;
  throw ConfigError("channel.loss_strategy", "unknown loss strategy '" + std::string(s) + "'");
}

struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::None;
  double fraction = 1.0;       // InterceptResendFraction
  int target = 3;              // InsiderCaseII: i0
  std::vector<int> colluders;  // InsiderCaseII: senders pooling A and B strings

  bool external_intercept() const noexcept {
    return kind == AdversaryKind::InterceptResendAll || kind == AdversaryKind::InterceptResendFraction;
  }
  double intercept_fraction() const noexcept {
    return kind == AdversaryKind::InterceptResendAll ? 1.0 : fraction;
  }
};

struct ChannelModel {
  double loss_prob = 0.0;
  double p_x = 0.0;
  double p_y = 0.0;
  double p_z = 0.0;
  LossStrategy loss_strategy = LossStrategy::Remove;
  AdversaryStrategy adversary;
  // Loss and Pauli noise also act on the sender-to-sender hops, not only on
  // the final hop to the receivers.
  bool all_hops = false;

  static ChannelModel ideal() { return {}; }
};

inline void validate(const ChannelModel& ch, int m) {
  auto prob = [](double p, const char* path) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(path, "probability outside [0,1]");
  };
  prob(ch.loss_prob, "channel.loss_prob");
  prob(ch.p_x, "channel.p_x");
  prob(ch.p_y, "channel.p_y");
  prob(ch.p_z, "channel.p_z");
  if (ch.p_x + ch.p_y + ch.p_z > 1.0 + 1e-12) throw ConfigError("channel.p_x", "p_x + p_y + p_z exceeds 1");
  const auto& adv = ch.adversary;
  if (adv.kind == AdversaryKind::InterceptResendFraction && !(adv.fraction > 0.0 && adv.fraction <= 1.0))
    throw ConfigError("channel.adversary.fraction", "must lie in (0,1]");
  if (adv.kind == AdversaryKind::InsiderCaseII) {
    if (adv.target < 3 || adv.target > m) throw ConfigError("channel.adversary.target", "need 3 <= i0 <= m");
    if (adv.colluders.empty()) throw ConfigError("channel.adversary.colluders", "empty colluder set");
    for (int c : adv.colluders)
      if (c < 1 || c >= adv.target)
        throw ConfigError("channel.adversary.colluders", "colluder " + std::to_string(c) + " not in 1..i0-1");
  }
}

// One intercept-resend observation: Eve's basis and outcome at a position.
struct EveObservation {
  std::size_t position = 0;
  Basis basis = Basis::Z;
  std::uint8_t outcome = 0;
};

// Eve measures each attacked qubit in a uniformly random basis and forwards
// the collapsed state. `fraction` < 1 attacks each qubit independently.
inline std::vector<Qubit> eve_intercept_resend(std::vector<Qubit> qubits, RandomSource& rand,
                                               std::vector<EveObservation>* records = nullptr,
                                               double fraction = 1.0) {
  for (std::size_t k = 0; k < qubits.size(); ++k) {
    if (fraction < 1.0 && !rand.bernoulli(fraction)) continue;
    const Basis guess = basis_from_bit(rand.bit());
    const auto outcome = measure(qubits[k], guess, rand);
    qubits[k] = encode(outcome, to_bit(guess));
    if (records) records->push_back({k, guess, outcome});
  }
  return qubits;
}

inline PauliOp sample_pauli(const ChannelModel& ch, RandomSource& rand) {
  if (ch.p_x == 0.0 && ch.p_y == 0.0 && ch.p_z == 0.0) return PauliOp::I;
  const double u = rand.uniform();
  if (u < ch.p_x) return PauliOp::X;
  if (u < ch.p_x + ch.p_y) return PauliOp::Y;
  if (u < ch.p_x + ch.p_y + ch.p_z) return PauliOp::Z;
  return PauliOp::I;
}

// Sends a sequence through the channel: loss, then Pauli noise, then the
// external intercept-resend adversary if one is attached. With the Remove
// strategy a lost slot comes back empty; with Substitute it carries a fresh
// random BB84 state.
inline std::vector<std::optional<Qubit>> transmit(std::span<const Qubit> qubits, const ChannelModel& ch,
                                                  RandomSource& rand,
                                                  std::vector<EveObservation>* eve_records = nullptr,
                                                  bool attach_adversary = true) {
  std::vector<std::optional<Qubit>> out;
  out.reserve(qubits.size());
  const bool eve = attach_adversary && ch.adversary.external_intercept();
  const double f = ch.adversary.intercept_fraction();
  for (std::size_t k = 0; k < qubits.size(); ++k) {
    if (ch.loss_prob > 0.0 && rand.bernoulli(ch.loss_prob)) {
      if (ch.loss_strategy == LossStrategy::Remove) {
        out.emplace_back(std::nullopt);
      } else {
        const auto v = rand.bit();
        out.emplace_back(encode(v, rand.bit()));
      }
      continue;
    }
    Qubit q = apply_pauli(qubits[k], sample_pauli(ch, rand));
    if (eve && (f >= 1.0 || rand.bernoulli(f))) {
      const Basis guess = basis_from_bit(rand.bit());
      const auto outcome = measure(q, guess, rand);
      q = encode(outcome, to_bit(guess));
      if (eve_records) eve_records->push_back({k, guess, outcome});
    }
    out.emplace_back(q);
  }
  return out;
}

}  // namespace qss
