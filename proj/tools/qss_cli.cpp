// qss_cli: experiments, single-run transcripts and transcript replay for the
// multi-party secret sharing simulator.
//
// Exit codes: 0 success, 1 abort-dominated run (abort rate above 1/2) or a
// replay that found inconsistencies, 2 invalid configuration or input.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qss/qss.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kAbortDominated = 1;
constexpr int kInvalid = 2;

// Named starting points; a config file and flags are layered on top.
const std::map<std::string, qss::Fields>& scenarios() {
  static const std::map<std::string, qss::Fields> table{
      {"honest", {}},
      {"noisy", {{"p_x", "0.01"}, {"p_z", "0.01"}}},
      {"lossy", {{"loss_prob", "0.1"}}},
      {"no-memory", {{"quantum_memory", "0"}}},
      {"intercept-resend", {{"adversary", "intercept_resend_all"}}},
      {"intercept-fraction", {{"adversary", "intercept_resend_fraction"}, {"fraction", "0.25"}}},
      {"ordering-enforced", {{"adversary", "ordering_violation"}}},
      {"ordering-attack", {{"adversary", "ordering_violation"}, {"enforce_ordering", "0"}}},
      {"insider1", {{"adversary", "insider_case1"}, {"omit_hadamard", "2"}}},
      {"insider1-h", {{"adversary", "insider_case1"}}},
      {"insider2", {{"m", "3"}, {"adversary", "insider_case2"}, {"target", "3"}, {"colluders", "1,2"}, {"omit_hadamard", "3"}}},
      {"insider2-h", {{"m", "3"}, {"adversary", "insider_case2"}, {"target", "3"}, {"colluders", "1,2"}}},
  };
  return table;
}

// Flags that map one-to-one onto setting keys.
struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

constexpr Flag kSettingFlags[] = {
    {"-m", "m", "number of senders"},
    {"-n", "n", "number of receivers"},
    {"-N", "N", "qubits per receiver"},
    {"--variant", "variant", "main, A or B"},
    {"--check-fraction", "check_fraction", "fraction of blocks used for the check"},
    {"--threshold", "qber_abort_threshold", "abort when the check error rate exceeds this"},
    {"--memory", "quantum_memory", "receivers store qubits until the announcements (0/1)"},
    {"--enforce-ordering", "enforce_ordering", "reject early basis announcements (0/1)"},
    {"--allow-even-n-variant-b", "allow_even_n_variant_b", "diagnostic bypass (0/1)"},
    {"--omit-hadamard", "omit_hadamard", "senders (2..m) that skip the H step, comma separated"},
    {"--loss", "loss_prob", "per-qubit loss probability"},
    {"--px", "p_x", "Pauli X probability"},
    {"--py", "p_y", "Pauli Y probability"},
    {"--pz", "p_z", "Pauli Z probability"},
    {"--loss-strategy", "loss_strategy", "remove or substitute"},
    {"--all-hops", "all_hops", "apply loss and noise between senders too (0/1)"},
    {"--adversary", "adversary",
     "none, intercept_resend_all, intercept_resend_fraction, ordering_violation, insider_case1, insider_case2"},
    {"--fraction", "fraction", "intercepted fraction"},
    {"--target", "target", "case II target sender"},
    {"--colluders", "colluders", "case II colluding senders, comma separated"},
};

struct CommonOptions {
  std::string scenario = "honest";
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> raw;
};

void add_common(CLI::App* app, CommonOptions& o) {
  std::vector<std::string> names;
  for (const auto& [name, _] : scenarios()) names.push_back(name);
  app->add_option("--scenario", o.scenario, "starting scenario")->check(CLI::IsMember(names));
  app->add_option("-c,--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  for (const auto& f : kSettingFlags) app->add_option(f.name, o.raw[f.key], f.help);
  app->add_option("--set", o.sets, "extra key=value setting (repeatable)");
}

// Scenario, then config file, then flags.
template <typename Apply>
void layer_settings(const CLI::App* app, const CommonOptions& o, Apply&& apply, qss::ExperimentSpec* spec) {
  for (const auto& [k, v] : scenarios().at(o.scenario)) apply(k, v);
  if (!o.config_path.empty()) {
    if (!spec) throw qss::ConfigError("config", "config files are only read by the run command");
    std::ifstream in(o.config_path);
    qss::load_experiment_config(*spec, in);
  }
  for (const auto& f : kSettingFlags)
    if (app->count(f.name) > 0) apply(f.key, o.raw.at(f.key));
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw qss::ConfigError("--set", "expected key=value, got '" + s + "'");
    apply(s.substr(0, eq), s.substr(eq + 1));
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-party quantum secret sharing simulator"};
  app.require_subcommand(1);

  // run
  CommonOptions run_opts;
  std::string run_out;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string metrics, format, message_hex;
  auto* run = app.add_subcommand("run", "Monte Carlo experiment over many seeded trials");
  add_common(run, run_opts);
  run->add_option("-t,--trials", trials, "number of trials");
  run->add_option("-s,--seed", seed, "master seed");
  run->add_option("-j,--threads", threads, "worker threads");
  run->add_option("--metrics", metrics, "comma-separated metric list");
  run->add_option("-f,--format", format, "json, csv or text");
  run->add_option("--message-hex", message_hex, "encrypt this message with the first trial's final key");
  run->add_option("-o,--output", run_out, "output path (default stdout)");

  // transcript
  CommonOptions tr_opts;
  std::string tr_out;
  std::uint64_t tr_seed = 1;
  bool tr_reconcile = false;
  auto* transcript = app.add_subcommand("transcript", "write the transcript of one protocol run");
  add_common(transcript, tr_opts);
  transcript->add_option("-s,--seed", tr_seed, "run seed");
  transcript->add_flag("--reconcile", tr_reconcile, "append reconciliation of the raw key");
  transcript->add_option("-o,--output", tr_out, "output path (default stdout)");

  // replay
  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "verify a transcript file");
  replay->add_option("file", replay_path, "transcript file")->required()->check(CLI::ExistingFile);

  // example
  std::string ex_out;
  auto* example = app.add_subcommand("example", "transcript of the fixed two-sender, three-receiver example");
  example->add_option("-o,--output", ex_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      qss::ExperimentSpec spec;
      layer_settings(
          run, run_opts, [&](const std::string& k, const std::string& v) { qss::apply_experiment_setting(spec, k, v); },
          &spec);
      if (trials) spec.trials = *trials;
      if (seed) spec.seed = *seed;
      if (threads) spec.threads = *threads;
      if (!metrics.empty()) qss::apply_experiment_setting(spec, "metrics", metrics);
      if (!format.empty()) spec.output = qss::parse_output(format);
      if (!message_hex.empty()) qss::apply_experiment_setting(spec, "message_hex", message_hex);
      const auto report = qss::run_experiment(spec);
      write_output(run_out, qss::render(report));
      if (report.abort_rate() > 0.5) {
        std::cerr << "abort-dominated run: abort rate " << qss::format_number(report.abort_rate()) << '\n';
        return kAbortDominated;
      }
      return kOk;
    }

    if (*transcript) {
      qss::ProtocolConfig cfg;
      qss::ChannelModel ch;
      layer_settings(
          transcript, tr_opts,
          [&](const std::string& k, const std::string& v) {
            if (!qss::apply_setting(cfg, ch, k, v)) throw qss::ConfigError(k, "unknown setting");
          },
          nullptr);
      cfg.seed = tr_seed;
      auto t = qss::run_protocol(cfg, ch);
      if (tr_reconcile && t.raw_key) {
        const auto pair = qss::build_canonical_css();
        qss::RandomSource rand(qss::derive_seed(cfg.seed, qss::kPostprocessStream, 0));
        qss::log_reconciliation(t, pair, qss::reconcile_key(pair, *t.alice_key, *t.raw_key, cfg.m, rand));
      }
      write_output(tr_out, qss::transcript_text(t));
      if (t.abort_reason) {
        std::cerr << "run aborted: " << *t.abort_reason << '\n';
        return kAbortDominated;
      }
      return kOk;
    }

    if (*replay) {
      std::ifstream in(replay_path);
      const auto v = qss::replay(in);
      for (const auto& i : v.issues) {
        std::cout << replay_path << ':' << i.line << ": ";
        if (i.position) std::cout << "position " << *i.position << ": ";
        std::cout << i.message << '\n';
      }
      if (v.raw_key) std::cout << "raw key: " << qss::to_string(*v.raw_key) << '\n';
      if (!v.coset_keys.empty()) {
        std::string keys;
        for (const auto& k : v.coset_keys) keys += qss::to_string(k);
        std::cout << "coset keys: " << keys << '\n';
      }
      if (v.aborted) std::cout << "run aborted\n";
      std::cout << (v.ok() ? "verdict: ok" : "verdict: inconsistent (" + std::to_string(v.issues.size()) + " issues)")
                << '\n';
      return v.ok() ? kOk : kAbortDominated;
    }

    if (*example) {
      const auto t = qss::run_protocol(qss::example_config(), qss::ChannelModel::ideal(), qss::example_overrides());
      write_output(ex_out, qss::transcript_text(t));
      return kOk;
    }
  } catch (const qss::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const qss::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
