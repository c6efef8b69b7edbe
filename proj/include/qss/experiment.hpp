#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "qss/bits.hpp"
#include "qss/css.hpp"
#include "qss/errors.hpp"
#include "qss/format.hpp"
#include "qss/postprocess.hpp"
#include "qss/run.hpp"
#include "qss/settings.hpp"
#include "qss/transcript_io.hpp"

namespace qss {

enum class Metric {
  Qber,
  DetectionProb,
  KeyRate,
  Efficiency,
  SiftRate,
  AdversaryAccuracy,
  AdversaryHiddenAccuracy,
  BlockYield,
};

inline constexpr std::array kAllMetrics{Metric::Qber,       Metric::DetectionProb,     Metric::KeyRate,
                                        Metric::Efficiency, Metric::SiftRate,          Metric::AdversaryAccuracy,
                                        Metric::AdversaryHiddenAccuracy, Metric::BlockYield};

constexpr std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::Qber: return "qber";
    case Metric::DetectionProb: return "detection_prob";
    case Metric::KeyRate: return "key_rate";
    case Metric::Efficiency: return "efficiency";
    case Metric::SiftRate: return "sift_rate";
    case Metric::AdversaryAccuracy: return "adversary_accuracy";
    case Metric::AdversaryHiddenAccuracy: return "adversary_hidden_accuracy";
    case Metric::BlockYield: return "block_yield";
  }
  return "qber";
}

inline Metric parse_metric(std::string_view s) {
  for (auto m : kAllMetrics)
    if (s == to_string(m)) return m;
  throw ConfigError("experiment.metrics", "unknown metric '" + std::string(s) + "'");
}

enum class OutputFormat { Json, Csv, Text };

inline OutputFormat parse_output(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "text") return OutputFormat::Text;
  throw ConfigError("experiment.output", "unknown output format '" + std::string(s) + "'");
}

constexpr std::string_view to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Text: return "text";
  }
  return "json";
}

struct ExperimentSpec {
  ProtocolConfig protocol;
  ChannelModel channel;
  std::size_t trials = 100;
  std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  OutputFormat output = OutputFormat::Json;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // When set, the first completed trial's final key encrypts this message.
  std::optional<Bits> message;

  bool wants(Metric m) const { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); }
};

// Applies one key of the experiment config. Protocol and channel keys are
// shared with the transcript config record; "seed" here is the master seed.
inline void apply_experiment_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  if (key == "trials") {
    spec.trials = parse_unsigned(value, "experiment.trials");
  } else if (key == "seed") {
    spec.seed = parse_unsigned(value, "experiment.seed");
  } else if (key == "threads") {
    spec.threads = static_cast<unsigned>(parse_unsigned(value, "experiment.threads"));
  } else if (key == "output") {
    spec.output = parse_output(value);
  } else if (key == "metrics") {
    spec.metrics.clear();
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto end = value.find(',', start);
      spec.metrics.push_back(parse_metric(value.substr(start, end == std::string_view::npos ? value.npos : end - start)));
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
  } else if (key == "message_hex") {
    spec.message = from_hex(value, value.size() * 4);
  } else if (!apply_setting(spec.protocol, spec.channel, key, value)) {
    throw ConfigError(std::string(key), "unknown setting");
  }
}

// Config file: "key = value" per line, '#' starts a comment.
inline void load_experiment_config(ExperimentSpec& spec, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      apply_experiment_setting(spec, key, value);
    } catch (const ConfigError& e) {
      throw ParseError(lineno, e.what());
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
  }
}

inline void validate(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw ConfigError("experiment.trials", "need at least one trial");
  if (spec.threads < 1) throw ConfigError("experiment.threads", "need at least one thread");
  if (spec.metrics.empty()) throw ConfigError("experiment.metrics", "no metrics requested");
  validate(spec.protocol);
  validate(spec.channel, spec.protocol.m);
}

// Stream ids for derive_seed.
inline constexpr std::uint64_t kProtocolStream = 0;
inline constexpr std::uint64_t kPostprocessStream = 1;

struct MetricSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

struct OtpDemo {
  std::optional<std::size_t> trial;
  Bits final_key;
  Bits ciphertext;
  bool decrypted_ok = false;
  std::optional<std::string> error;
};

struct RunReport {
  ExperimentSpec spec;
  std::size_t trials = 0;
  std::size_t aborts = 0;
  std::size_t invalid = 0;
  std::vector<std::pair<Metric, MetricSummary>> metrics;
  std::uint64_t transcript_digest = 0;
  std::vector<std::uint64_t> trial_digests;  // first few trials
  std::optional<OtpDemo> otp;

  double abort_rate() const { return trials ? static_cast<double>(aborts) / static_cast<double>(trials) : 0.0; }

  const MetricSummary* metric(Metric m) const {
    for (const auto& [k, v] : metrics)
      if (k == m) return &v;
    return nullptr;
  }
};

struct TrialResult {
  std::array<std::optional<double>, kAllMetrics.size()> samples{};
  bool aborted = false;
  bool invalid = false;
  std::uint64_t digest = 0;
};

// Positions in unchecked blocks that survived loss and sifting, over all
// non-check positions. Truncation to the shortest receiver list during key
// assembly is not counted against it.
inline double key_efficiency(const Transcript& t) {
  const auto& cfg = t.config;
  std::vector<bool> checked(cfg.N, false);
  for (auto j : t.check->blocks) checked[j] = true;
  std::size_t usable = 0, total = 0;
  for (const auto& rec : t.bobs)
    for (std::size_t j = 0; j < cfg.N; ++j) {
      if (checked[j]) continue;
      ++total;
      usable += rec.outcomes[j].has_value();
    }
  return total ? static_cast<double>(usable) / static_cast<double>(total) : 0.0;
}

inline std::optional<double> sift_rate(const Transcript& t) {
  std::size_t received = 0, kept = 0;
  for (const auto& rec : t.bobs) {
    for (std::size_t j = 0; j < rec.outcomes.size(); ++j) {
      if (!rec.lost.empty() && rec.lost[j]) continue;
      ++received;
      kept += rec.outcomes[j] ? 1 : 0;
    }
  }
  if (!received) return std::nullopt;
  return static_cast<double>(kept) / static_cast<double>(received);
}

inline TrialResult run_trial(const ExperimentSpec& spec, const CssPair& pair, std::size_t index) {
  ProtocolConfig cfg = spec.protocol;
  cfg.seed = derive_seed(spec.seed, kProtocolStream, index);
  const Transcript t = run_protocol(cfg, spec.channel);

  TrialResult r;
  r.aborted = t.abort_reason.has_value();
  r.invalid = t.invalid;
  auto set = [&](Metric m, double v) {
    if (spec.wants(m)) r.samples[static_cast<std::size_t>(m)] = v;
  };
  if (t.check && t.check->compared > 0) {
    set(Metric::Qber, t.check->rate());
    set(Metric::DetectionProb, t.check->disagreements > 0 ? 1.0 : 0.0);
    set(Metric::KeyRate, key_rate(t.check->rate()));
  }
  if (t.check) {
    set(Metric::Efficiency, key_efficiency(t));
    if (auto s = sift_rate(t)) set(Metric::SiftRate, *s);
  }
  if (t.adversary && (t.adversary->key_guess || t.adversary->recovered_a)) {
    set(Metric::AdversaryAccuracy, t.adversary->accuracy);
    if (t.adversary->hidden_accuracy) set(Metric::AdversaryHiddenAccuracy, *t.adversary->hidden_accuracy);
  }
  if (spec.wants(Metric::BlockYield) && t.raw_key && !t.raw_key->empty()) {
    RandomSource rand(derive_seed(spec.seed, kPostprocessStream, index));
    const auto rep = reconcile_key(pair, *t.alice_key, *t.raw_key, cfg.m, rand);
    set(Metric::BlockYield, rep.yield());
  }
  r.digest = fnv1a(transcript_text(t));
  return r;
}

inline OtpDemo otp_demo(const ExperimentSpec& spec, const CssPair& pair) {
  OtpDemo demo;
  for (std::size_t i = 0; i < spec.trials; ++i) {
    ProtocolConfig cfg = spec.protocol;
    cfg.seed = derive_seed(spec.seed, kProtocolStream, i);
    const Transcript t = run_protocol(cfg, spec.channel);
    if (!t.raw_key || t.raw_key->empty()) continue;
    RandomSource rand(derive_seed(spec.seed, kPostprocessStream, i));
    const auto rep = reconcile_key(pair, *t.alice_key, *t.raw_key, cfg.m, rand);
    demo.trial = i;
    demo.final_key = rep.key_alice;
    KeyPad alice_pad(rep.key_alice);
    KeyPad bob_pad(rep.key_bob);
    try {
      demo.ciphertext = otp_send(*spec.message, alice_pad);
      demo.decrypted_ok = otp_receive(demo.ciphertext, bob_pad) == *spec.message;
    } catch (const KeyExhaustedError& e) {
      demo.error = e.what();
    }
    return demo;
  }
  demo.error = "no trial produced a raw key";
  return demo;
}

// Runs `trials` independent protocol instances. Trial i uses protocol seed
// derive_seed(seed, 0, i) and post-processing seed derive_seed(seed, 1, i);
// results are merged in trial order, so the report does not depend on the
// thread count.
inline RunReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const auto pair = build_canonical_css();
  std::vector<TrialResult> results(spec.trials);
  const unsigned workers = std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.trials));
  if (workers <= 1) {
    for (std::size_t i = 0; i < spec.trials; ++i) results[i] = run_trial(spec, pair, i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < spec.trials; i += workers) results[i] = run_trial(spec, pair, i);
      });
  }

  RunReport rep;
  rep.spec = spec;
  rep.trials = spec.trials;
  rep.transcript_digest = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    rep.aborts += r.aborted ? 1 : 0;
    rep.invalid += r.invalid ? 1 : 0;
    rep.transcript_digest = fnv1a(hex64(r.digest), rep.transcript_digest);
    if (i < 8) rep.trial_digests.push_back(r.digest);
  }
  for (auto m : spec.metrics) {
    MetricSummary s;
    double sum = 0.0;
    for (const auto& r : results)
      if (const auto& v = r.samples[static_cast<std::size_t>(m)]) {
        sum += *v;
        ++s.count;
      }
    if (s.count) {
      s.mean = sum / static_cast<double>(s.count);
      double ss = 0.0;
      for (const auto& r : results)
        if (const auto& v = r.samples[static_cast<std::size_t>(m)]) ss += (*v - s.mean) * (*v - s.mean);
      if (s.count > 1) s.stderr_ = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
    }
    rep.metrics.emplace_back(m, s);
  }
  if (spec.message) rep.otp = otp_demo(spec, pair);
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::ordered_json to_json(const RunReport& rep) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json spec;
  for (const auto& [k, v] : describe(rep.spec.protocol, rep.spec.channel))
    if (k != "seed") spec[k] = v;
  spec["trials"] = rep.spec.trials;
  spec["seed"] = rep.spec.seed;
  std::string metrics;
  for (auto m : rep.spec.metrics) metrics += (metrics.empty() ? "" : ",") + std::string(to_string(m));
  spec["metrics"] = metrics;
  j["spec"] = spec;
  j["trials"] = rep.trials;
  j["aborts"] = rep.aborts;
  j["abort_rate"] = rep.abort_rate();
  j["invalid"] = rep.invalid;
  nlohmann::ordered_json ms = nlohmann::ordered_json::object();
  for (const auto& [m, s] : rep.metrics) {
    nlohmann::ordered_json e;
    if (s.count) e["mean"] = s.mean;
    else e["mean"] = nullptr;
    e["stderr"] = s.stderr_;
    e["count"] = s.count;
    ms[std::string(to_string(m))] = e;
  }
  j["metrics"] = ms;
  j["transcript_digest"] = hex64(rep.transcript_digest);
  auto digests = nlohmann::ordered_json::array();
  for (auto d : rep.trial_digests) digests.push_back(hex64(d));
  j["trial_digests"] = digests;
  if (rep.otp) {
    nlohmann::ordered_json o;
    if (rep.otp->trial) o["trial"] = *rep.otp->trial;
    o["final_key_hex"] = to_hex(rep.otp->final_key);
    o["final_key_bits"] = rep.otp->final_key.size();
    o["ciphertext_hex"] = to_hex(rep.otp->ciphertext);
    o["decrypted_ok"] = rep.otp->decrypted_ok;
    if (rep.otp->error) o["error"] = *rep.otp->error;
    j["otp"] = o;
  }
  return j;
}

// CSV columns: metric,mean,stderr,count. Rows follow the requested metric
// order, then abort_rate (count = trials). A metric with no samples has an
// empty mean.
inline void write_csv(std::ostream& out, const RunReport& rep) {
  out << "metric,mean,stderr,count\n";
  for (const auto& [m, s] : rep.metrics)
    out << to_string(m) << ',' << (s.count ? format_number(s.mean) : "") << ',' << format_number(s.stderr_) << ','
        << s.count << '\n';
  out << "abort_rate," << format_number(rep.abort_rate()) << ",0," << rep.trials << '\n';
}

inline void write_text(std::ostream& out, const RunReport& rep) {
  const auto& c = rep.spec.protocol;
  out << "m=" << c.m << " n=" << c.n << " N=" << c.N << " variant=" << to_string(c.variant)
      << " adversary=" << to_string(rep.spec.channel.adversary.kind) << " trials=" << rep.trials
      << " seed=" << rep.spec.seed << '\n';
  out << "aborts: " << rep.aborts << " (" << format_number(rep.abort_rate()) << ")";
  if (rep.invalid) out << ", invalid: " << rep.invalid;
  out << '\n';
  for (const auto& [m, s] : rep.metrics) {
    out << "  " << to_string(m) << ": ";
    if (s.count) out << format_number(s.mean) << " +/- " << format_number(s.stderr_) << " (n=" << s.count << ")";
    else out << "n/a";
    out << '\n';
  }
  out << "transcript digest: " << hex64(rep.transcript_digest) << '\n';
  if (rep.otp) {
    if (rep.otp->error) out << "otp: " << *rep.otp->error << '\n';
    out << "otp key: " << to_hex(rep.otp->final_key) << " ciphertext: " << to_hex(rep.otp->ciphertext)
        << (rep.otp->decrypted_ok ? " (decrypts)" : "") << '\n';
  }
}

inline std::string render(const RunReport& rep) {
  std::ostringstream out;
  switch (rep.spec.output) {
    case OutputFormat::Json: out << to_json(rep).dump(2) << '\n'; break;
    case OutputFormat::Csv: write_csv(out, rep); break;
    case OutputFormat::Text: write_text(out, rep); break;
  }
  return out.str();
}

}  // namespace qss
