#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qss/errors.hpp"

namespace qss {

// One bit per element; every element is 0 or 1.
using Bits = std::vector<std::uint8_t>;

// A measurement slot: nullopt when no outcome exists (lost or sifted out).
using Outcome = std::optional<std::uint8_t>;
using Outcomes = std::vector<Outcome>;

inline std::string to_string(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

// Outcomes render as '0', '1' or 'x' for an empty slot.
inline std::string to_string(std::span<const Outcome> outcomes) {
  std::string s;
  s.reserve(outcomes.size());
  for (const auto& o : outcomes) s.push_back(!o ? 'x' : (*o ? '1' : '0'));
  return s;
}

inline Bits parse_bits(std::string_view text) {
  Bits out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      out.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ',' && c != ' ') {
      throw DomainError(std::string("invalid bit character '") + c + "'");
    }
  }
  return out;
}

inline Outcomes parse_outcomes(std::string_view text) {
  Outcomes out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == 'x') {
      out.emplace_back(std::nullopt);
    } else if (c == '0' || c == '1') {
      out.emplace_back(static_cast<std::uint8_t>(c - '0'));
    } else {
      throw DomainError(std::string("invalid outcome character '") + c + "'");
    }
  }
  return out;
}

inline Bits xor_bits(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DomainError("xor of bit strings with different lengths");
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

inline std::size_t weight(std::span<const std::uint8_t> bits) {
  std::size_t w = 0;
  for (auto b : bits) w += b;
  return w;
}

inline std::uint8_t parity(std::span<const std::uint8_t> bits) {
  std::uint8_t p = 0;
  for (auto b : bits) p ^= b;
  return p;
}

// Big-endian within each byte; a trailing partial byte is zero-padded.
inline std::string to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 8) {
    unsigned byte = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      byte <<= 1;
      if (i + k < bits.size()) byte |= bits[i + k];
    }
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0xF]);
  }
  return out;
}

inline Bits from_hex(std::string_view hex, std::size_t nbits) {
  Bits out;
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw DomainError(std::string("invalid hex character '") + c + "'");
    for (int k = 3; k >= 0; --k) out.push_back(static_cast<std::uint8_t>((v >> k) & 1));
  }
  if (nbits > out.size()) throw DomainError("hex string shorter than requested bit count");
  out.resize(nbits);
  return out;
}

}  // namespace qss
