#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qss/qubit.hpp"
#include "qss/random.hpp"

using namespace qss;

namespace {

// Amplitude-level reference for the four BB84 states.
using Vec = std::array<std::complex<double>, 2>;
using Mat = std::array<std::array<std::complex<double>, 2>, 2>;

Vec amplitudes(Qubit q) {
  const double r = 1.0 / std::sqrt(2.0);
  if (q.basis == Basis::Z) return q.value ? Vec{0.0, 1.0} : Vec{1.0, 0.0};
  return q.value ? Vec{r, -r} : Vec{r, r};
}

Vec mat_vec(const Mat& m, const Vec& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

// |<a|b>| == 1 means equal up to global phase.
bool same_ray(const Vec& a, const Vec& b) {
  const auto ip = std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
  return std::abs(std::abs(ip) - 1.0) < 1e-12;
}

const Mat kSigma1{{{0.0, 1.0}, {-1.0, 0.0}}};  // i*sigma_y
const Mat kHadamard{{{M_SQRT1_2, M_SQRT1_2}, {M_SQRT1_2, -M_SQRT1_2}}};
const Mat kX{{{0.0, 1.0}, {1.0, 0.0}}};
const Mat kY{{{0.0, std::complex<double>(0, -1)}, {std::complex<double>(0, 1), 0.0}}};
const Mat kZ{{{1.0, 0.0}, {0.0, -1.0}}};

std::vector<Qubit> all_states() {
  return {encode(0, 0), encode(1, 0), encode(0, 1), encode(1, 1)};
}

}  // namespace

TEST(Qubit, EncodeGivesTheFourStates) {
  EXPECT_EQ(ket(encode(0, 0)), "|0>");
  EXPECT_EQ(ket(encode(1, 0)), "|1>");
  EXPECT_EQ(ket(encode(0, 1)), "|+>");
  EXPECT_EQ(ket(encode(1, 1)), "|->");
}

TEST(Qubit, OperationsMatchAmplitudes) {
  for (auto q : all_states()) {
    EXPECT_TRUE(same_ray(mat_vec(kSigma1, amplitudes(q)), amplitudes(apply_sigma1(q)))) << ket(q);
    EXPECT_TRUE(same_ray(mat_vec(kHadamard, amplitudes(q)), amplitudes(apply_hadamard(q)))) << ket(q);
    EXPECT_TRUE(same_ray(mat_vec(kX, amplitudes(q)), amplitudes(apply_pauli(q, PauliOp::X)))) << ket(q);
    EXPECT_TRUE(same_ray(mat_vec(kY, amplitudes(q)), amplitudes(apply_pauli(q, PauliOp::Y)))) << ket(q);
    EXPECT_TRUE(same_ray(mat_vec(kZ, amplitudes(q)), amplitudes(apply_pauli(q, PauliOp::Z)))) << ket(q);
  }
}

TEST(Qubit, SetIsClosedUnderOperations) {
  const auto states = all_states();
  auto in_set = [&](Qubit q) { return std::find(states.begin(), states.end(), q) != states.end(); };
  for (auto q : states) {
    EXPECT_TRUE(in_set(apply_sigma1(q)));
    EXPECT_TRUE(in_set(apply_hadamard(q)));
    for (auto p : {PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z}) EXPECT_TRUE(in_set(apply_pauli(q, p)));
  }
}

TEST(Qubit, Involutions) {
  for (auto q : all_states()) {
    EXPECT_EQ(apply_sigma1(apply_sigma1(q)), q);
    EXPECT_EQ(apply_hadamard(apply_hadamard(q)), q);
  }
}

TEST(Qubit, Sigma1CommutesWithHadamardModuloPhase) {
  for (auto q : all_states()) EXPECT_EQ(apply_hadamard(apply_sigma1(q)), apply_sigma1(apply_hadamard(q)));
}

// Encoding a then b by successive parties equals encoding the XORs, for every
// pair of bit strings up to length 8.
TEST(Qubit, SuccessiveEncodingsCombineByXor) {
  for (unsigned len = 1; len <= 8; ++len) {
    const unsigned lim = 1u << len;
    for (unsigned a1 = 0; a1 < lim; a1 += (len > 4 ? 7 : 1))
      for (unsigned b1 = 0; b1 < lim; b1 += (len > 4 ? 5 : 1))
        for (unsigned a2 = 0; a2 < lim; a2 += (len > 4 ? 3 : 1))
          for (unsigned b2 = 0; b2 < lim; b2 += (len > 4 ? 11 : 1))
            for (unsigned k = 0; k < len; ++k) {
              const std::uint8_t x1 = (a1 >> k) & 1, y1 = (b1 >> k) & 1, x2 = (a2 >> k) & 1, y2 = (b2 >> k) & 1;
              Qubit q = encode(x1, y1);
              if (x2) q = apply_sigma1(q);
              if (y2) q = apply_hadamard(q);
              ASSERT_EQ(q, encode(x1 ^ x2, y1 ^ y2));
            }
  }
}

TEST(Qubit, ComposeMatchesSequentialApplication) {
  const std::array ops{PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z};
  for (auto a : ops)
    for (auto b : ops)
      for (auto q : all_states()) EXPECT_EQ(apply_pauli(apply_pauli(q, b), a), apply_pauli(q, compose(a, b)));
}

TEST(Qubit, MatchedBasisMeasurementIsDeterministic) {
  RandomSource rand(7);
  for (auto q : all_states())
    for (int i = 0; i < 50; ++i) EXPECT_EQ(measure(q, q.basis, rand), q.value);
}

// Mismatched basis: outcome is Bernoulli(1/2). Two-sided binomial check at
// 10^4 samples, |ones - 5000| < 4.5 sigma = 225.
TEST(Qubit, MismatchedBasisMeasurementIsFair) {
  RandomSource rand(11);
  for (auto q : all_states()) {
    int ones = 0;
    for (int i = 0; i < 10000; ++i) ones += measure(q, flip(q.basis), rand);
    EXPECT_LT(std::abs(ones - 5000), 225) << ket(q);
  }
}

TEST(Random, SameSeedSameStream) {
  RandomSource a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
}

TEST(Random, BelowStaysInRange) {
  RandomSource r(3);
  std::array<int, 6> hist{};
  for (int i = 0; i < 6000; ++i) ++hist[r.below(6)];
  for (int h : hist) EXPECT_GT(h, 800);
}
