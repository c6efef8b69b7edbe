#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qss/channel.hpp"
#include "qss/run.hpp"

using namespace qss;

namespace {

std::vector<Qubit> random_block(std::size_t len, RandomSource& rand) {
  std::vector<Qubit> out;
  for (std::size_t i = 0; i < len; ++i) {
    const auto v = rand.bit();
    out.push_back(encode(v, rand.bit()));
  }
  return out;
}

// Checked-position disagreement totals over `runs` protocol runs.
std::pair<std::size_t, std::size_t> checked_tally(const ChannelModel& ch, int runs, std::uint64_t master) {
  std::size_t dis = 0, cmp = 0;
  for (int r = 0; r < runs; ++r) {
    ProtocolConfig cfg;
    cfg.N = 40;
    cfg.qber_abort_threshold = 0.99;
    cfg.seed = derive_seed(master, 0, static_cast<std::uint64_t>(r));
    const auto t = run_protocol(cfg, ch);
    dis += t.check->disagreements;
    cmp += t.check->compared;
  }
  return {dis, cmp};
}

}  // namespace

TEST(Transmit, IdealChannelIsIdentity) {
  RandomSource rand(1);
  const auto block = random_block(500, rand);
  const auto out = transmit(block, ChannelModel::ideal(), rand);
  ASSERT_EQ(out.size(), block.size());
  for (std::size_t k = 0; k < block.size(); ++k) EXPECT_EQ(*out[k], block[k]);
}

TEST(Transmit, CertainBitFlipFlipsZBasis) {
  RandomSource rand(2);
  ChannelModel ch;
  ch.p_x = 1.0;
  for (std::uint8_t v : {0, 1}) {
    std::vector<Qubit> block(100, encode(v, 0));
    for (const auto& q : transmit(block, ch, rand)) EXPECT_EQ(q->value, v ^ 1);
  }
}

TEST(Transmit, LossFractionMatchesProbability) {
  RandomSource rand(3);
  ChannelModel ch;
  ch.loss_prob = 0.1;
  const auto out = transmit(random_block(10000, rand), ch, rand);
  std::size_t lost = 0;
  for (const auto& q : out) lost += !q.has_value();
  EXPECT_NEAR(static_cast<double>(lost) / 10000.0, 0.1, 0.01);
}

TEST(Transmit, RemovedLossesNeverReachTheKey) {
  ProtocolConfig cfg;
  cfg.N = 200;
  cfg.seed = 4;
  ChannelModel ch;
  ch.loss_prob = 0.2;
  const auto t = run_protocol(cfg, ch);
  ASSERT_FALSE(t.abort_reason);
  EXPECT_EQ(*t.raw_key, *t.alice_key);
  bool announced = false;
  for (const auto& e : t.events) {
    if (e.kind == "lost") announced = true;
    if (e.kind == "announce") {
      EXPECT_TRUE(announced);
    }
  }
}

TEST(Validate, RejectsBadProbabilities) {
  ChannelModel ch;
  ch.p_x = 0.6;
  ch.p_z = 0.6;
  EXPECT_THROW(validate(ch, 2), ConfigError);
  ch = {};
  ch.loss_prob = -0.1;
  EXPECT_THROW(validate(ch, 2), ConfigError);
  ch = {};
  ch.adversary.kind = AdversaryKind::InterceptResendFraction;
  ch.adversary.fraction = 0.0;
  EXPECT_THROW(validate(ch, 2), ConfigError);
  ch = {};
  ch.adversary.kind = AdversaryKind::InsiderCaseII;
  ch.adversary.target = 3;
  ch.adversary.colluders = {1, 2};
  EXPECT_THROW(validate(ch, 2), ConfigError);
  EXPECT_NO_THROW(validate(ch, 3));
  ch.adversary.colluders = {3};
  EXPECT_THROW(validate(ch, 3), ConfigError);
}

TEST(InterceptResend, CorrectGuessLeavesQubitUnchanged) {
  RandomSource rand(5);
  const auto block = random_block(2000, rand);
  std::vector<EveObservation> rec;
  const auto out = eve_intercept_resend(block, rand, &rec);
  ASSERT_EQ(rec.size(), block.size());
  for (const auto& r : rec) {
    if (r.basis != block[r.position].basis) continue;
    EXPECT_EQ(out[r.position], block[r.position]);
    EXPECT_EQ(r.outcome, block[r.position].value);
  }
}

TEST(InterceptResend, DisturbanceIsOneQuarter) {
  RandomSource rand(6);
  const auto block = random_block(10000, rand);
  const auto out = eve_intercept_resend(block, rand);
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < block.size(); ++k) wrong += measure(out[k], block[k].basis, rand) != block[k].value;
  EXPECT_NEAR(static_cast<double>(wrong) / 10000.0, 0.25, 0.02);
}

// Checked disagreement rate f/4 for partial interception.
TEST(InterceptResend, FractionDisturbanceScales) {
  for (double f : {0.25, 0.5, 1.0}) {
    ChannelModel ch;
    ch.adversary.kind = f < 1.0 ? AdversaryKind::InterceptResendFraction : AdversaryKind::InterceptResendAll;
    ch.adversary.fraction = f;
    const auto [dis, cmp] = checked_tally(ch, 170, static_cast<std::uint64_t>(f * 100));
    ASSERT_GE(cmp, 10000u);
    EXPECT_NEAR(static_cast<double>(dis) / static_cast<double>(cmp), f / 4.0, 0.02) << "f=" << f;
  }
}

TEST(Loss, SubstituteDisagreesHalfTheTime) {
  ChannelModel ch;
  ch.loss_prob = 0.2;
  ch.loss_strategy = LossStrategy::Substitute;
  const auto [dis, cmp] = checked_tally(ch, 170, 31);
  EXPECT_NEAR(static_cast<double>(dis) / static_cast<double>(cmp), 0.1, 0.02);
}

TEST(Noise, DepolarizingRateShowsInCheck) {
  // Each of X, Y, Z w.p. 0.05: an eigenstate flips under two of the three.
  ChannelModel ch;
  ch.p_x = ch.p_y = ch.p_z = 0.05;
  const auto [dis, cmp] = checked_tally(ch, 170, 32);
  EXPECT_NEAR(static_cast<double>(dis) / static_cast<double>(cmp), 0.10, 0.015);
}

// A wrong-basis measurement carries no information about the value bit:
// plug-in mutual information between Eve's outcome and the value stays
// under 0.01 bits over 10^4 such positions.
TEST(InterceptResend, WrongBasisOutcomesCarryNoInformation) {
  RandomSource rand(7);
  double counts[2][2] = {};
  std::size_t n = 0;
  while (n < 10000) {
    const auto block = random_block(1000, rand);
    std::vector<EveObservation> rec;
    eve_intercept_resend(block, rand, &rec);
    for (const auto& r : rec) {
      if (r.basis == block[r.position].basis || n >= 10000) continue;
      counts[block[r.position].value][r.outcome] += 1;
      ++n;
    }
  }
  double mi = 0.0;
  for (int v = 0; v < 2; ++v)
    for (int o = 0; o < 2; ++o) {
      const double pj = counts[v][o] / n;
      const double pv = (counts[v][0] + counts[v][1]) / n;
      const double po = (counts[0][o] + counts[1][o]) / n;
      if (pj > 0) mi += pj * std::log2(pj / (pv * po));
    }
  EXPECT_LT(mi, 0.01);
}

TEST(Strings, RoundTrip) {
  for (auto k : {AdversaryKind::None, AdversaryKind::InterceptResendAll, AdversaryKind::InterceptResendFraction,
                 AdversaryKind::OrderingViolation, AdversaryKind::InsiderCaseI, AdversaryKind::InsiderCaseII})
    EXPECT_EQ(parse_adversary(to_string(k)), k);
  EXPECT_THROW(parse_adversary("bogus"), ConfigError);
}
