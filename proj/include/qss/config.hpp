#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qss/errors.hpp"

namespace qss {

// Main: every Alice holds nN-bit A and B strings.
// A:    nN-bit A strings, N-bit B strings (one basis flag per n-qubit block).
// B:    N-bit A and B strings; Alice1 expands each a_j into n bits whose XOR
//       is a_j. Requires odd n, otherwise the key collapses to Alice1's bits.
enum class Variant { Main, A, B };

constexpr std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Main: return "main";
    case Variant::A: return "A";
    case Variant::B: return "B";
  }
  return "main";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "main" || s == "Main" || s == "M") return Variant::Main;
  if (s == "A" || s == "a") return Variant::A;
  if (s == "B" || s == "b") return Variant::B;
  throw ConfigError("protocol.variant", "unknown variant '" + std::string(s) + "'");
}

struct ProtocolConfig {
  int m = 2;           // senders
  int n = 3;           // receivers
  std::size_t N = 16;  // qubits per receiver
  Variant variant = Variant::Main;
  double check_fraction = 0.5;
  double qber_abort_threshold = 0.11;
  bool quantum_memory = true;
  std::uint64_t seed = 1;

  // Reject basis announcements made before every receiver acknowledged.
  // Turned off only to demonstrate the interception that the ordering rule
  // prevents.
  bool enforce_ordering = true;
  // Diagnostic bypass of the odd-n requirement of variant B.
  bool allow_even_n_variant_b = false;
  // 1-based indices of senders that skip the random Hadamard step (degraded
  // protocol). Such a sender's B string is all zeros.
  std::vector<int> omit_hadamard;

  std::size_t qubits() const noexcept { return static_cast<std::size_t>(n) * N; }

  bool omits_hadamard(int alice) const noexcept {
    return std::find(omit_hadamard.begin(), omit_hadamard.end(), alice) != omit_hadamard.end();
  }
};

// Number of check blocks: ceil(check_fraction * N), capped so that at least
// one block is left for the key.
inline std::size_t check_block_count(const ProtocolConfig& cfg) {
  const auto wanted = static_cast<std::size_t>(std::ceil(cfg.check_fraction * static_cast<double>(cfg.N)));
  return std::min(wanted, cfg.N - 1);
}

inline void validate(const ProtocolConfig& cfg) {
  if (cfg.m < 2) throw ConfigError("protocol.m", "need at least 2 senders");
  if (cfg.n < 2) throw ConfigError("protocol.n", "need at least 2 receivers");
  if (cfg.N < 1) throw ConfigError("protocol.N", "need at least 1 qubit per receiver");
  if (!(cfg.check_fraction > 0.0 && cfg.check_fraction < 1.0))
    throw ConfigError("protocol.check_fraction", "must lie in (0,1)");
  if (!(cfg.qber_abort_threshold > 0.0 && cfg.qber_abort_threshold < 1.0))
    throw ConfigError("protocol.qber_abort_threshold", "must lie in (0,1)");
  if (cfg.variant == Variant::B && cfg.n % 2 == 0 && !cfg.allow_even_n_variant_b)
    throw ConfigError("protocol.n", "variant B requires an odd number of receivers");
  for (int i : cfg.omit_hadamard) {
    if (i < 2 || i > cfg.m)
      throw ConfigError("protocol.omit_hadamard", "sender index " + std::to_string(i) + " out of range");
  }
}

}  // namespace qss
