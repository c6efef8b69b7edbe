#pragma once

#include <vector>

#include "qss/bits.hpp"
#include "qss/config.hpp"
#include "qss/protocol.hpp"
#include "qss/run.hpp"

namespace qss {

// Two senders, three receivers, six blocks, with fixed strings and the first
// and fifth blocks used for the check. The expected raw key is 1010.
inline ProtocolConfig example_config() {
  ProtocolConfig cfg;
  cfg.m = 2;
  cfg.n = 3;
  cfg.N = 6;
  cfg.variant = Variant::Main;
  cfg.check_fraction = 2.0 / 6.0;
  cfg.seed = 1;
  return cfg;
}

inline std::vector<PartySecrets> example_secrets() {
  PartySecrets a1;
  a1.alice = 1;
  a1.a_bits = parse_bits("1,0,0,1,0,1,0,1,1,0,0,0,1,1,1,0,1,0");
  a1.b_bits = parse_bits("0,1,0,1,1,0,1,1,0,0,1,0,1,0,1,0,0,1");
  PartySecrets a2;
  a2.alice = 2;
  a2.a_bits = parse_bits("1,1,1,0,0,1,1,1,0,0,0,1,0,1,1,0,0,1");
  a2.b_bits = parse_bits("1,0,0,1,1,0,0,0,1,1,1,1,0,0,0,1,0,1");
  return {a1, a2};
}

inline RunOverrides example_overrides() {
  RunOverrides ov;
  ov.secrets = example_secrets();
  ov.check_blocks = std::vector<std::size_t>{0, 4};
  return ov;
}

}  // namespace qss
