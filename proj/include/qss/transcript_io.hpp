#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qss/bits.hpp"
#include "qss/css.hpp"
#include "qss/errors.hpp"
#include "qss/format.hpp"
#include "qss/postprocess.hpp"
#include "qss/protocol.hpp"
#include "qss/settings.hpp"

namespace qss {

// Text transcript, one event per line after a header line:
//
//   qss-transcript 1
//   <seq> <kind> <party> key=value key=value ...
//
// Field order is fixed by the writer. Values containing spaces or quotes are
// double-quoted with backslash escapes. Bit strings use '0'/'1' and 'x' for
// an empty slot; positions are 1-based.
inline constexpr std::string_view kTranscriptHeader = "qss-transcript 1";

namespace detail {

inline bool needs_quotes(std::string_view v) {
  return v.empty() || v.find_first_of(" \t\"\\=") != std::string_view::npos;
}

inline std::string quote(std::string_view v) {
  std::string s = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') s.push_back('\\');
    s.push_back(c);
  }
  s.push_back('"');
  return s;
}

}  // namespace detail

inline void write_event(std::ostream& out, const Event& e) {
  out << e.seq << ' ' << e.kind << ' ' << e.party;
  for (const auto& [k, v] : e.fields) {
    out << ' ' << k << '=';
    if (detail::needs_quotes(v)) out << detail::quote(v);
    else out << v;
  }
  out << '\n';
}

inline void write_transcript(std::ostream& out, const Transcript& t) {
  out << kTranscriptHeader << '\n';
  for (const auto& e : t.events) write_event(out, e);
}

inline std::string transcript_text(const Transcript& t) {
  std::ostringstream out;
  write_transcript(out, t);
  return out.str();
}

struct ParsedEvent {
  Event event;
  std::size_t line = 0;
};

inline std::vector<ParsedEvent> parse_transcript(std::istream& in) {
  std::vector<ParsedEvent> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kTranscriptHeader) throw ParseError(lineno, "missing transcript header");
      header = true;
      continue;
    }
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      const auto start = pos;
      while (pos < line.size() && line[pos] != ' ') ++pos;
      return line.substr(start, pos - start);
    };
    ParsedEvent pe;
    pe.line = lineno;
    const auto seq = next_token();
    pe.event.kind = next_token();
    pe.event.party = next_token();
    if (seq.empty() || pe.event.kind.empty() || pe.event.party.empty())
      throw ParseError(lineno, "expected '<seq> <kind> <party>'");
    try {
      pe.event.seq = parse_unsigned(seq, "seq");
    } catch (const ConfigError&) {
      throw ParseError(lineno, "bad sequence number '" + seq + "'");
    }
    while (true) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      const auto eq = line.find('=', pos);
      if (eq == std::string::npos) throw ParseError(lineno, "field without '='");
      std::string key = line.substr(pos, eq - pos);
      if (key.empty() || key.find(' ') != std::string::npos) throw ParseError(lineno, "malformed field name");
      pos = eq + 1;
      std::string value;
      if (pos < line.size() && line[pos] == '"') {
        ++pos;
        bool closed = false;
        while (pos < line.size()) {
          char c = line[pos++];
          if (c == '\\' && pos < line.size()) {
            value.push_back(line[pos++]);
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            value.push_back(c);
          }
        }
        if (!closed) throw ParseError(lineno, "unterminated quoted value");
      } else {
        const auto start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        value = line.substr(start, pos - start);
      }
      pe.event.fields.emplace_back(std::move(key), std::move(value));
    }
    out.push_back(std::move(pe));
  }
  if (!header) throw ParseError(lineno, "empty transcript");
  return out;
}

inline std::vector<ParsedEvent> parse_transcript(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_transcript(in);
}

// Records reconciliation of a run's raw key. The code pair is written as
// generator rows so a replay can rebuild it.
inline void log_reconciliation(Transcript& t, const CssPair& pair, const ReconciliationReport& rep) {
  auto rows = [](const gf2::Matrix& m) {
    std::string s;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i) s.push_back(',');
      s += to_string(m.row(i));
    }
    return s;
  };
  t.log("css", "-", {{"c1", rows(pair.c1().generator())}, {"c2", rows(pair.c2().generator())}});
  if (rep.padding) t.log("pad", "alices", {{"bits", to_string(rep.padding_bits)}});
  for (std::size_t b = 0; b < rep.details.size(); ++b) {
    const auto& d = rep.details[b];
    t.log("reconcile", "-",
          {{"block", std::to_string(b + 1)},
           {"public", to_string(d.public_word)},
           {"corrected", d.corrected ? to_string(*d.corrected) : std::string("x")},
           {"key", d.key_bob ? to_string(*d.key_bob) : std::string("x")}});
  }
}

struct ReplayIssue {
  std::size_t line = 0;
  std::optional<std::size_t> position;  // 1-based qubit position when one applies
  std::string message;
};

struct ReplayVerdict {
  std::vector<ReplayIssue> issues;
  std::optional<Bits> raw_key;
  std::vector<Bits> coset_keys;
  bool aborted = false;

  bool ok() const { return issues.empty(); }
};

namespace detail {

inline std::vector<std::size_t> parse_position_list(const std::string& s, std::size_t line) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const auto item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    std::uint64_t v;
    try {
      v = parse_unsigned(item, "positions");
    } catch (const ConfigError&) {
      throw ParseError(line, "bad position '" + item + "'");
    }
    if (v == 0) throw ParseError(line, "positions are 1-based");
    out.push_back(static_cast<std::size_t>(v - 1));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

inline const std::string& require(const ParsedEvent& pe, std::string_view key) {
  const auto* v = pe.event.field(key);
  if (!v) throw ParseError(pe.line, std::string(pe.event.kind) + " record without '" + std::string(key) + "'");
  return *v;
}

// 0-based index of "<prefix><k>" with 1 <= k <= count.
inline std::size_t party_index(const ParsedEvent& pe, std::string_view prefix, std::size_t count) {
  const auto& p = pe.event.party;
  if (p.rfind(prefix, 0) != 0) throw ParseError(pe.line, "unexpected party '" + p + "'");
  std::uint64_t k = 0;
  try {
    k = parse_unsigned(std::string_view(p).substr(prefix.size()), "party");
  } catch (const ConfigError&) {
    throw ParseError(pe.line, "bad party '" + p + "'");
  }
  if (k < 1 || k > count) throw ParseError(pe.line, "party '" + p + "' out of range");
  return static_cast<std::size_t>(k - 1);
}

template <typename F>
auto at_line(std::size_t line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ParseError(line, e.what());
  } catch (const ConfigError& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace detail

// Re-derives everything that follows from the public record and the
// measurement records: measurement bases, the check tally, each receiver's
// key contribution, the raw key and, when present, the reconciled coset keys.
// Any disagreement is reported with its line and, where it applies, the
// qubit position.
inline ReplayVerdict replay(const std::vector<ParsedEvent>& events) {
  using detail::require;
  ReplayVerdict v;
  auto issue = [&](std::size_t line, std::optional<std::size_t> pos, std::string msg) {
    v.issues.push_back({line, pos ? std::optional<std::size_t>(*pos + 1) : std::nullopt, std::move(msg)});
  };

  if (events.empty() || events.front().event.kind != "config")
    throw ParseError(events.empty() ? 1 : events.front().line, "first record must be the config record");
  ProtocolConfig cfg;
  ChannelModel ch;
  detail::at_line(events.front().line, [&] {
    for (const auto& [k, val] : events.front().event.fields) apply_setting(cfg, ch, k, val);
    validate(cfg);
    return 0;
  });

  const auto nb = static_cast<std::size_t>(cfg.n);
  const auto na = static_cast<std::size_t>(cfg.m);
  std::vector<std::optional<std::uint64_t>> ack(nb), ann(na);
  std::vector<Bits> announced(na);
  std::vector<std::vector<bool>> lost(nb, std::vector<bool>(cfg.N, false));
  std::vector<std::optional<Bits>> guesses(nb);
  std::vector<std::optional<Bits>> bases(nb);
  std::vector<std::optional<Outcomes>> outcomes(nb);
  std::vector<std::size_t> check_positions;
  std::vector<Bits> alice_reveals;
  std::optional<std::size_t> check_line;
  std::vector<std::optional<Bits>> contributions(nb);
  std::vector<std::vector<std::size_t>> contribution_positions(nb);
  std::optional<std::pair<Bits, std::size_t>> raw_key_record;
  std::optional<CssPair> css;
  Bits pad;

  std::uint64_t last_seq = 0;
  for (const auto& pe : events) {
    const auto& e = pe.event;
    if (e.seq <= last_seq && &pe != &events.front()) issue(pe.line, std::nullopt, "sequence number not increasing");
    last_seq = e.seq;

    if (e.kind == "ack") {
      ack[detail::party_index(pe, "bob", nb)] = e.seq;
    } else if (e.kind == "lost") {
      if (e.party.rfind("bob", 0) == 0 || e.party.rfind("alice", 0) == 0) {
        for (auto k : detail::parse_position_list(require(pe, "positions"), pe.line)) {
          if (k >= cfg.qubits()) throw ParseError(pe.line, "lost position out of range");
          lost[bob_of(k, cfg.n)][block_of(k, cfg.n)] = true;
        }
      }
    } else if (e.kind == "announce") {
      const auto i = detail::party_index(pe, "alice", na);
      ann[i] = e.seq;
      announced[i] = detail::at_line(pe.line, [&] { return parse_bits(require(pe, "b")); });
      if (announced[i].size() != b_length(cfg)) issue(pe.line, std::nullopt, "basis string has the wrong length");
      bool early = false;
      for (const auto& a : ack) early = early || !a;
      if (early) issue(pe.line, std::nullopt, "basis string announced before every receiver acknowledged");
    } else if (e.kind == "guess") {
      const auto l = detail::party_index(pe, "bob", nb);
      guesses[l] = detail::at_line(pe.line, [&] { return parse_bits(require(pe, "bases")); });
    } else if (e.kind == "measure") {
      const auto l = detail::party_index(pe, "bob", nb);
      bases[l] = detail::at_line(pe.line, [&] { return parse_bits(require(pe, "bases")); });
      outcomes[l] = detail::at_line(pe.line, [&] { return parse_outcomes(require(pe, "bits")); });
      if (bases[l]->size() != cfg.N || outcomes[l]->size() != cfg.N)
        throw ParseError(pe.line, "measurement record length is not N");
      bool all_announced = true;
      for (const auto& s : announced) all_announced = all_announced && !s.empty();
      if (!all_announced) {
        issue(pe.line, std::nullopt, "measurement before every basis string was announced");
        continue;
      }
      for (std::size_t j = 0; j < cfg.N; ++j) {
        const auto k = position(j, l, cfg.n);
        const auto want = to_bit(required_basis(cfg, announced, k));
        const auto& o = (*outcomes[l])[j];
        if (lost[l][j] && o) issue(pe.line, k, "outcome recorded for a lost qubit");
        if (cfg.quantum_memory) {
          if ((*bases[l])[j] != want) issue(pe.line, k, "measurement basis differs from the XOR of announced bases");
        } else if ((*bases[l])[j] != want && o) {
          issue(pe.line, k, "outcome kept for a position whose guessed basis was wrong");
        }
      }
      if (!cfg.quantum_memory && guesses[l] && *guesses[l] != *bases[l])
        issue(pe.line, std::nullopt, "measurement bases differ from the published guesses");
    } else if (e.kind == "check_select") {
      check_positions = detail::parse_position_list(require(pe, "positions"), pe.line);
      alice_reveals.clear();
    } else if (e.kind == "reveal") {
      if (e.party.rfind("alice", 0) == 0) {
        alice_reveals.push_back(detail::at_line(pe.line, [&] { return parse_bits(require(pe, "bits")); }));
        if (alice_reveals.back().size() != check_positions.size())
          throw ParseError(pe.line, "revealed string length differs from the check selection");
      } else {
        const auto l = detail::party_index(pe, "bob", nb);
        const auto bits = detail::at_line(pe.line, [&] { return parse_outcomes(require(pe, "bits")); });
        if (!outcomes[l]) throw ParseError(pe.line, "reveal before measurement");
        std::size_t i = 0;
        for (auto k : check_positions) {
          if (bob_of(k, cfg.n) != l) continue;
          if (i >= bits.size()) throw ParseError(pe.line, "revealed string too short");
          if (bits[i] != (*outcomes[l])[block_of(k, cfg.n)])
            issue(pe.line, k, "revealed check value differs from the measurement record");
          ++i;
        }
      }
    } else if (e.kind == "check") {
      check_line = pe.line;
      std::size_t compared = 0, disagreements = 0;
      for (std::size_t idx = 0; idx < check_positions.size(); ++idx) {
        const auto k = check_positions[idx];
        const auto& rec = outcomes.at(bob_of(k, cfg.n));
        if (!rec) throw ParseError(pe.line, "check before measurement");
        const auto& o = (*rec)[block_of(k, cfg.n)];
        if (!o) continue;
        std::uint8_t expect = 0;
        for (const auto& r : alice_reveals) expect ^= r[idx];
        ++compared;
        if (*o != expect) ++disagreements;
      }
      const auto rc = detail::at_line(pe.line, [&] { return parse_unsigned(require(pe, "compared"), "compared"); });
      const auto rd =
          detail::at_line(pe.line, [&] { return parse_unsigned(require(pe, "disagreements"), "disagreements"); });
      if (rc != compared || rd != disagreements) issue(pe.line, std::nullopt, "check tally does not match the reveals");
      const bool pass = compared == 0 ||
                        static_cast<double>(disagreements) / static_cast<double>(compared) <= cfg.qber_abort_threshold;
      if ((require(pe, "result") == "pass") != pass) issue(pe.line, std::nullopt, "check verdict inconsistent with threshold");
    } else if (e.kind == "contribution") {
      const auto l = detail::party_index(pe, "bob", nb);
      contribution_positions[l] = detail::parse_position_list(require(pe, "positions"), pe.line);
      contributions[l] = detail::at_line(pe.line, [&] { return parse_bits(require(pe, "bits")); });
      const auto& pos = contribution_positions[l];
      if (pos.size() != contributions[l]->size()) throw ParseError(pe.line, "positions and bits differ in length");
      if (!outcomes[l]) throw ParseError(pe.line, "contribution before measurement");
      for (std::size_t i = 0; i < pos.size(); ++i) {
        const auto& o = (*outcomes[l])[block_of(pos[i], cfg.n)];
        if (bob_of(pos[i], cfg.n) != l) issue(pe.line, pos[i], "contribution position belongs to another receiver");
        else if (!o || *o != (*contributions[l])[i])
          issue(pe.line, pos[i], "key contribution differs from the measurement record");
      }
    } else if (e.kind == "raw_key") {
      raw_key_record = {detail::at_line(pe.line, [&] { return parse_bits(require(pe, "bits")); }), pe.line};
    } else if (e.kind == "abort") {
      v.aborted = true;
    } else if (e.kind == "css") {
      css = detail::at_line(pe.line, [&] {
        auto rows = [](const std::string& s) {
          gf2::Matrix m;
          std::size_t start = 0;
          while (start <= s.size()) {
            const auto end = s.find(',', start);
            m.push_row(parse_bits(s.substr(start, end == std::string::npos ? std::string::npos : end - start)));
            if (end == std::string::npos) break;
            start = end + 1;
          }
          return m;
        };
        return CssPair(gf2::LinearCode::from_generator(rows(require(pe, "c1"))),
                       gf2::LinearCode::from_generator(rows(require(pe, "c2"))));
      });
    } else if (e.kind == "pad") {
      pad = detail::at_line(pe.line, [&] { return parse_bits(require(pe, "bits")); });
    } else if (e.kind == "reconcile") {
      if (!css) throw ParseError(pe.line, "reconcile record before the code pair");
      if (!v.raw_key) throw ParseError(pe.line, "reconcile record before the raw key");
      const auto block = static_cast<std::size_t>(
          detail::at_line(pe.line, [&] { return parse_unsigned(require(pe, "block"), "block"); }));
      const auto n = css->block_length();
      Bits stream = *v.raw_key;
      stream.insert(stream.end(), pad.begin(), pad.end());
      if (block == 0 || block * n > stream.size()) throw ParseError(pe.line, "block index out of range");
      const Bits word(stream.begin() + static_cast<std::ptrdiff_t>((block - 1) * n),
                      stream.begin() + static_cast<std::ptrdiff_t>(block * n));
      const auto pub = detail::at_line(pe.line, [&] { return parse_bits(require(pe, "public")); });
      const auto decoded = css->c1().decode(xor_bits(word, pub));
      const auto& corrected = require(pe, "corrected");
      if (!decoded) {
        if (corrected != "x") issue(pe.line, std::nullopt, "decoding fails but a corrected word is recorded");
        continue;
      }
      if (corrected != to_string(*decoded)) issue(pe.line, std::nullopt, "corrected codeword does not match decoding");
      const auto k = css->coset_key(*decoded);
      if (require(pe, "key") != to_string(k)) issue(pe.line, std::nullopt, "coset key does not match the corrected codeword");
      v.coset_keys.push_back(k);
    }

    // The raw key is re-derived as soon as every contribution is known.
    if (e.kind == "raw_key") {
      const auto& [bits, line] = *raw_key_record;
      if (!check_line) throw ParseError(line, "raw key before the check");
      // Contributions must be the usable unchecked slots, in order.
      std::vector<BobRecord> recs(nb);
      for (std::size_t l = 0; l < nb; ++l) {
        if (!outcomes[l]) throw ParseError(line, "raw key before every measurement");
        recs[l].outcomes = *outcomes[l];
      }
      std::vector<std::size_t> blocks;
      for (std::size_t i = 0; i < check_positions.size(); i += nb) blocks.push_back(block_of(check_positions[i], cfg.n));
      const auto slots = key_slots(cfg, recs, blocks);
      Bits key(slots.empty() ? 0 : slots[0].size(), 0);
      for (std::size_t l = 0; l < nb; ++l) {
        std::vector<std::size_t> want;
        for (auto j : slots[l]) want.push_back(position(j, l, cfg.n));
        if (!contributions[l]) {
          issue(line, std::nullopt, bob_name(l) + " has no key contribution");
          continue;
        }
        if (want != contribution_positions[l]) issue(line, std::nullopt, bob_name(l) + " contributed from the wrong positions");
        for (std::size_t i = 0; i < key.size(); ++i) key[i] ^= *(*outcomes[l])[slots[l][i]];
      }
      if (key != bits) {
        for (std::size_t i = 0; i < std::min(key.size(), bits.size()); ++i)
          if (key[i] != bits[i]) issue(line, std::nullopt, "raw key bit " + std::to_string(i + 1) + " does not match");
        if (key.size() != bits.size()) issue(line, std::nullopt, "raw key length does not match");
      }
      v.raw_key = key;
    }
  }

  if (!v.aborted && !raw_key_record) issue(events.back().line, std::nullopt, "transcript ends without raw key or abort");
  return v;
}

inline ReplayVerdict replay(std::istream& in) { return replay(parse_transcript(in)); }
inline ReplayVerdict replay_text(std::string_view text) { return replay(parse_transcript(text)); }

}  // namespace qss
