#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qss/channel.hpp"
#include "qss/config.hpp"
#include "qss/format.hpp"

namespace qss {

// Flat key/value view of a run configuration. The same keys are used by the
// transcript config record, the experiment config file and the CLI.
using Fields = std::vector<std::pair<std::string, std::string>>;

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s.push_back(',');
    s += std::to_string(v[i]);
  }
  return s.empty() ? "-" : s;
}

inline std::vector<int> parse_ints(std::string_view s, const std::string& path) {
  std::vector<int> out;
  if (s == "-" || s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const auto item = s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    out.push_back(static_cast<int>(parse_unsigned(item, path)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

inline Fields describe(const ProtocolConfig& cfg, const ChannelModel& ch) {
  Fields f{
      {"m", std::to_string(cfg.m)},
      {"n", std::to_string(cfg.n)},
      {"N", std::to_string(cfg.N)},
      {"variant", std::string(to_string(cfg.variant))},
      {"check_fraction", format_number(cfg.check_fraction)},
      {"qber_abort_threshold", format_number(cfg.qber_abort_threshold)},
      {"quantum_memory", cfg.quantum_memory ? "1" : "0"},
      {"seed", std::to_string(cfg.seed)},
      {"enforce_ordering", cfg.enforce_ordering ? "1" : "0"},
      {"allow_even_n_variant_b", cfg.allow_even_n_variant_b ? "1" : "0"},
      {"omit_hadamard", join_ints(cfg.omit_hadamard)},
      {"loss_prob", format_number(ch.loss_prob)},
      {"p_x", format_number(ch.p_x)},
      {"p_y", format_number(ch.p_y)},
      {"p_z", format_number(ch.p_z)},
      {"loss_strategy", std::string(to_string(ch.loss_strategy))},
      {"all_hops", ch.all_hops ? "1" : "0"},
      {"adversary", std::string(to_string(ch.adversary.kind))},
  };
  if (ch.adversary.kind == AdversaryKind::InterceptResendFraction)
    f.emplace_back("fraction", format_number(ch.adversary.fraction));
  if (ch.adversary.kind == AdversaryKind::InsiderCaseII) {
    f.emplace_back("target", std::to_string(ch.adversary.target));
    f.emplace_back("colluders", join_ints(ch.adversary.colluders));
  }
  return f;
}

// Applies one setting. Returns false for keys that are not protocol or
// channel settings, so callers can layer their own keys on top.
inline bool apply_setting(ProtocolConfig& cfg, ChannelModel& ch, std::string_view key, std::string_view value) {
  const std::string k(key);
  if (k == "m") cfg.m = static_cast<int>(parse_unsigned(value, "protocol.m"));
  else if (k == "n") cfg.n = static_cast<int>(parse_unsigned(value, "protocol.n"));
  else if (k == "N") cfg.N = parse_unsigned(value, "protocol.N");
  else if (k == "variant") cfg.variant = parse_variant(value);
  else if (k == "check_fraction") cfg.check_fraction = parse_number(value, "protocol.check_fraction");
  else if (k == "qber_abort_threshold") cfg.qber_abort_threshold = parse_number(value, "protocol.qber_abort_threshold");
  else if (k == "quantum_memory") cfg.quantum_memory = parse_flag(value, "protocol.quantum_memory");
  else if (k == "seed") cfg.seed = parse_unsigned(value, "protocol.seed");
  else if (k == "enforce_ordering") cfg.enforce_ordering = parse_flag(value, "protocol.enforce_ordering");
  else if (k == "allow_even_n_variant_b") cfg.allow_even_n_variant_b = parse_flag(value, "protocol.allow_even_n_variant_b");
  else if (k == "omit_hadamard") cfg.omit_hadamard = parse_ints(value, "protocol.omit_hadamard");
  else if (k == "loss_prob") ch.loss_prob = parse_number(value, "channel.loss_prob");
  else if (k == "p_x") ch.p_x = parse_number(value, "channel.p_x");
  else if (k == "p_y") ch.p_y = parse_number(value, "channel.p_y");
  else if (k == "p_z") ch.p_z = parse_number(value, "channel.p_z");
  else if (k == "loss_strategy") ch.loss_strategy = parse_loss_strategy(value);
  else if (k == "all_hops") ch.all_hops = parse_flag(value, "channel.all_hops");
  else if (k == "adversary") ch.adversary.kind = parse_adversary(value);
  else if (k == "fraction") ch.adversary.fraction = parse_number(value, "channel.adversary.fraction");
  else if (k == "target") ch.adversary.target = static_cast<int>(parse_unsigned(value, "channel.adversary.target"));
  else if (k == "colluders") ch.adversary.colluders = parse_ints(value, "channel.adversary.colluders");
  else return false;
  return true;
}

}  // namespace qss
