#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qss/experiment.hpp"

using namespace qss;

namespace {

ExperimentSpec base_spec() {
  ExperimentSpec s;
  s.protocol.N = 20;
  s.trials = 50;
  s.seed = 9;
  return s;
}

double mean_of(const RunReport& r, Metric m) {
  const auto* s = r.metric(m);
  EXPECT_NE(s, nullptr);
  return s ? s->mean : NAN;
}

}  // namespace

TEST(Experiment, SameSpecSameReport) {
  auto spec = base_spec();
  spec.channel.p_x = 0.02;
  for (auto fmt : {OutputFormat::Json, OutputFormat::Csv, OutputFormat::Text}) {
    spec.output = fmt;
    EXPECT_EQ(render(run_experiment(spec)), render(run_experiment(spec)));
  }
}

TEST(Experiment, ThreadCountDoesNotChangeTheReport) {
  auto spec = base_spec();
  spec.channel.adversary.kind = AdversaryKind::InterceptResendFraction;
  spec.channel.adversary.fraction = 0.3;
  auto threaded = spec;
  threaded.threads = 4;
  EXPECT_EQ(to_json(run_experiment(spec)), to_json(run_experiment(threaded)));
}

TEST(Experiment, SeedChangesDigest) {
  auto a = base_spec();
  auto b = a;
  b.seed = 10;
  EXPECT_NE(run_experiment(a).transcript_digest, run_experiment(b).transcript_digest);
}

TEST(Experiment, IdealRunHasZeroQberAndFullEfficiency) {
  const auto r = run_experiment(base_spec());
  EXPECT_EQ(r.aborts, 0u);
  EXPECT_EQ(mean_of(r, Metric::Qber), 0.0);
  EXPECT_EQ(mean_of(r, Metric::Efficiency), 1.0);
  EXPECT_EQ(r.metric(Metric::Efficiency)->stderr_, 0.0);
  EXPECT_EQ(mean_of(r, Metric::KeyRate), 1.0);
  EXPECT_EQ(mean_of(r, Metric::BlockYield), 1.0);
  EXPECT_EQ(mean_of(r, Metric::SiftRate), 1.0);
  EXPECT_EQ(r.metric(Metric::AdversaryAccuracy)->count, 0u);
}

TEST(Experiment, InterceptResendQberBand) {
  auto spec = base_spec();
  spec.protocol.N = 100;
  spec.trials = 70;  // 70 * 50 blocks * 3 positions > 10^4 checked positions
  spec.channel.adversary.kind = AdversaryKind::InterceptResendAll;
  const auto r = run_experiment(spec);
  const double q = mean_of(r, Metric::Qber);
  EXPECT_GE(q, 0.23);
  EXPECT_LE(q, 0.27);
  EXPECT_EQ(r.aborts, r.trials);
  EXPECT_GT(r.abort_rate(), 0.5);
}

TEST(Experiment, NoMemoryHalvesEfficiency) {
  auto spec = base_spec();
  spec.protocol.quantum_memory = false;
  spec.protocol.N = 2000;
  spec.trials = 40;
  const auto r = run_experiment(spec);
  EXPECT_NEAR(mean_of(r, Metric::Efficiency), 0.5, 0.02);
  EXPECT_NEAR(mean_of(r, Metric::SiftRate), 0.5, 0.01);
}

TEST(Experiment, MetricSubsetAndStderr) {
  auto spec = base_spec();
  spec.metrics = {Metric::Qber, Metric::DetectionProb};
  spec.channel.p_z = 0.1;
  spec.protocol.qber_abort_threshold = 0.5;
  const auto r = run_experiment(spec);
  ASSERT_EQ(r.metrics.size(), 2u);
  EXPECT_EQ(r.metrics[0].first, Metric::Qber);
  EXPECT_EQ(r.metrics[0].second.count, spec.trials);
  EXPECT_GT(r.metrics[0].second.stderr_, 0.0);
  EXPECT_EQ(r.metric(Metric::Efficiency), nullptr);
}

TEST(Experiment, OtpDemoDecrypts) {
  auto spec = base_spec();
  spec.protocol.N = 400;  // 200 raw bits, 29 blocks, 29 final key bits
  spec.message = from_hex("c0ffee", 24);
  const auto r = run_experiment(spec);
  ASSERT_TRUE(r.otp);
  EXPECT_FALSE(r.otp->error);
  EXPECT_TRUE(r.otp->decrypted_ok);
  EXPECT_EQ(r.otp->ciphertext.size(), 24u);
}

TEST(Experiment, OtpDemoRefusesShortKey) {
  auto spec = base_spec();
  spec.protocol.N = 4;
  spec.message = from_hex("ffffffffffff", 48);
  const auto r = run_experiment(spec);
  ASSERT_TRUE(r.otp);
  EXPECT_TRUE(r.otp->error);
  EXPECT_FALSE(r.otp->decrypted_ok);
}

TEST(Experiment, CsvLayout) {
  auto spec = base_spec();
  spec.metrics = {Metric::Qber, Metric::Efficiency};
  spec.trials = 3;
  std::ostringstream out;
  write_csv(out, run_experiment(spec));
  EXPECT_EQ(out.str(), "metric,mean,stderr,count\nqber,0,0,3\nefficiency,1,0,3\nabort_rate,0,0,3\n");
}

TEST(Experiment, JsonKeysAreStable) {
  auto spec = base_spec();
  spec.trials = 2;
  const auto j = to_json(run_experiment(spec));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"spec", "trials", "aborts", "abort_rate", "invalid", "metrics",
                                            "transcript_digest", "trial_digests"}));
  EXPECT_EQ(j["spec"]["m"], "2");
  EXPECT_EQ(j["metrics"]["qber"]["count"], 2);
}

TEST(Config, FileWithOverrides) {
  std::istringstream in(
      "# scenario\n"
      "m = 3\n"
      "n=5\n"
      "variant = B   # odd n\n"
      "trials = 12\n"
      "metrics = qber,key_rate\n"
      "adversary = intercept_resend_fraction\n"
      "fraction = 0.5\n"
      "output = csv\n");
  ExperimentSpec spec;
  load_experiment_config(spec, in);
  apply_experiment_setting(spec, "trials", "7");
  EXPECT_EQ(spec.protocol.m, 3);
  EXPECT_EQ(spec.protocol.n, 5);
  EXPECT_EQ(spec.protocol.variant, Variant::B);
  EXPECT_EQ(spec.trials, 7u);
  EXPECT_EQ(spec.metrics.size(), 2u);
  EXPECT_EQ(spec.channel.adversary.kind, AdversaryKind::InterceptResendFraction);
  EXPECT_EQ(spec.channel.adversary.fraction, 0.5);
  EXPECT_EQ(spec.output, OutputFormat::Csv);
  EXPECT_NO_THROW(validate(spec));
}

TEST(Config, ErrorsNameLineOrPath) {
  ExperimentSpec spec;
  std::istringstream in("m = 2\nbogus_key = 1\n");
  try {
    load_experiment_config(spec, in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream no_eq("m 2\n");
  EXPECT_THROW(load_experiment_config(spec, no_eq), ParseError);

  spec = {};
  spec.protocol.variant = Variant::B;
  spec.protocol.n = 4;
  try {
    run_experiment(spec);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "protocol.n");
  }
  spec = {};
  spec.trials = 0;
  EXPECT_THROW(run_experiment(spec), ConfigError);
  EXPECT_THROW(apply_experiment_setting(spec, "metrics", "qber,nope"), ConfigError);
}
