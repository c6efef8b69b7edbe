#pragma once

#include <cstdint>
#include <string_view>

#include "qss/random.hpp"

namespace qss {

enum class Basis : std::uint8_t { Z = 0, X = 1 };

constexpr Basis basis_from_bit(std::uint8_t b) noexcept { return b ? Basis::X : Basis::Z; }
constexpr std::uint8_t to_bit(Basis b) noexcept { return static_cast<std::uint8_t>(b); }
constexpr Basis flip(Basis b) noexcept { return b == Basis::Z ? Basis::X : Basis::Z; }

// One of |0>, |1>, |+>, |->, modulo global phase. `value` is the encoded
// bit and `basis` the preparation basis:
//   {0,Z} = |0>   {1,Z} = |1>   {0,X} = |+>   {1,X} = |->
struct Qubit {
  std::uint8_t value = 0;
  Basis basis = Basis::Z;

  friend constexpr bool operator==(const Qubit&, const Qubit&) = default;
};

enum class PauliOp : std::uint8_t { I, X, Y, Z };

constexpr Qubit encode(std::uint8_t value, std::uint8_t basis) noexcept {
  return Qubit{static_cast<std::uint8_t>(value & 1u), basis_from_bit(basis & 1u)};
}

// sigma_1 = i*sigma_y: flips the value in both bases. The signs in
// sigma_1|0> = -|1> and sigma_1|-> = -|+> are global phases and are dropped.
constexpr Qubit apply_sigma1(Qubit q) noexcept {
  return Qubit{static_cast<std::uint8_t>(q.value ^ 1u), q.basis};
}

// H swaps |0>,|1> with |+>,|->, keeping the value bit.
constexpr Qubit apply_hadamard(Qubit q) noexcept { return Qubit{q.value, flip(q.basis)}; }

// X flips Z-basis values and only phases X eigenstates; Z does the reverse.
// Y = XZ up to phase flips the value in both bases.
constexpr Qubit apply_pauli(Qubit q, PauliOp p) noexcept {
  switch (p) {
    case PauliOp::I:
      return q;
    case PauliOp::X:
      return q.basis == Basis::Z ? apply_sigma1(q) : q;
    case PauliOp::Z:
      return q.basis == Basis::X ? apply_sigma1(q) : q;
    case PauliOp::Y:
      return apply_sigma1(q);
  }
  return q;
}

// Pauli product modulo phase.
constexpr PauliOp compose(PauliOp a, PauliOp b) noexcept {
  const auto xa = a == PauliOp::X || a == PauliOp::Y;
  const auto za = a == PauliOp::Z || a == PauliOp::Y;
  const auto xb = b == PauliOp::X || b == PauliOp::Y;
  const auto zb = b == PauliOp::Z || b == PauliOp::Y;
  const bool x = xa != xb;
  const bool z = za != zb;
  if (x && z) return PauliOp::Y;
  if (x) return PauliOp::X;
  if (z) return PauliOp::Z;
  return PauliOp::I;
}

// Projective measurement. The qubit is taken by value and is gone afterwards;
// a caller that forwards the particle must re-prepare encode(outcome, basis).
inline std::uint8_t measure(Qubit q, Basis basis, RandomSource& rand) {
  if (basis == q.basis) return q.value;
  return rand.bit();
}

constexpr std::string_view ket(Qubit q) noexcept {
  if (q.basis == Basis::Z) return q.value ? "|1>" : "|0>";
  return q.value ? "|->" : "|+>";
}

}  // namespace qss
