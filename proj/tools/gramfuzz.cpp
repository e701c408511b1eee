// gramfuzz command-line front end.
//
//   gramfuzz fuzz   --grammar G --target minijs --seeds DIR --out DIR [...]
//   gramfuzz cmin   --target xml --seeds DIR --out DIR
//   gramfuzz trim   --input FILE --grammar G --target minijs [--output FILE]
//   gramfuzz mutate --input FILE --grammar G --strategy tree --partner FILE --out DIR
//   gramfuzz report --out DIR
//   gramfuzz replay --manifest out/manifest.json --out NEWDIR
//
// Exit codes: 0 success, 1 fatal error while running, 2 bad configuration.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gramfuzz/campaign.hpp"
#include "gramfuzz/mutate.hpp"
#include "gramfuzz/parse_tree.hpp"
#include "gramfuzz/report.hpp"
#include "gramfuzz/trim.hpp"

namespace fs = std::filesystem;
using namespace gramfuzz;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Bytes read_input(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const fs::path& p, ByteView data) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
}

struct TargetFlags {
  std::string name;
  std::string cmd;
  int timeout_ms = 1000;
  std::string isolation = "fork";

  void add_to(CLI::App* app) {
    auto* t = app->add_option("--target", name, "bundled target: xml, minijs, fixture");
    auto* c = app->add_option("--cmd", cmd, "external command, input path at @@");
    t->excludes(c);
    app->add_option("--timeout-ms", timeout_ms, "per-execution timeout")->check(CLI::PositiveNumber);
    app->add_option("--isolation", isolation, "in-process targets: fork or direct")
        ->check(CLI::IsMember({"fork", "direct"}));
  }

  TargetSpec resolve() const {
    TargetSpec spec;
    if (!cmd.empty()) {
      spec.kind = TargetSpec::Kind::external_command;
      spec.command = split_command(cmd);
      if (spec.command.empty()) throw ConfigError("--cmd is empty");
      spec.name = fs::path(spec.command.front()).filename().string();
    } else if (!name.empty()) {
      auto b = builtin_target(name);
      if (!b) {
        std::string known;
        for (const auto& n : builtin_target_names()) known += " " + n;
        throw ConfigError("unknown target '" + name + "' (known:" + known + ")");
      }
      spec = *b;
    } else {
      throw ConfigError("one of --target or --cmd is required");
    }
    spec.timeout = std::chrono::milliseconds(timeout_ms);
    spec.isolation = isolation == "direct" ? Isolation::direct : Isolation::fork_server;
    return spec;
  }
};

GrammarSpec grammar_or_config_error(const fs::path& p) {
  try {
    return load_grammar_file(p);
  } catch (const GrammarError& e) {
    throw ConfigError(p.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

void on_sigint(int) { request_campaign_stop(); }

std::string status_line(const CampaignStatus& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "cycle %llu execs %llu queue %zu edges %zu crashes %zu hangs %zu elapsed %.1fs",
                static_cast<unsigned long long>(s.cycle), static_cast<unsigned long long>(s.execs),
                s.queue_size, s.edges, s.crashes, s.hangs,
                std::chrono::duration<double>(s.elapsed).count());
  return buf;
}

int print_report(const CampaignReport& r) {
  std::cout << "done: execs " << r.total_execs << " queue " << r.queue.size() << " edges " << r.edges
            << " cycles " << r.cycles_completed << " crashes " << r.crashes.size() << " hangs "
            << r.hangs.size() << "\n";
  for (const auto& c : r.crashes)
    std::cout << "crash " << c.key << " first at exec " << c.found_at_exec << " via "
              << to_string(c.strategy) << " (" << c.count << "x) -> " << c.file.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grammar-aware greybox fuzzer"};
  app.require_subcommand(1);

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign");
  std::string grammar, out, dict;
  std::vector<std::string> seeds;
  std::uint64_t rng_seed = 0, cycles = 0, max_execs = 0;
  double minutes = 0;
  unsigned workers = 1;
  std::size_t havoc_budget = 256;
  bool same_kind = false, no_tree = false, no_det = false, no_distill = false, no_strip = false,
       stats_timing = false, builtin_trim_only = false, no_auto_dict = false;
  std::string dict_mode = "enhanced";
  TargetFlags fuzz_target;
  fuzz->add_option("--grammar", grammar, "grammar file")->required();
  fuzz_target.add_to(fuzz);
  fuzz->add_option("--seeds", seeds, "seed directory (repeatable)")->required();
  fuzz->add_option("--out", out, "output directory")->required();
  fuzz->add_option("--dict", dict, "dictionary file");
  fuzz->add_option("--rng-seed", rng_seed, "random seed");
  auto* cycles_opt = fuzz->add_option("--cycles", cycles, "stop after N queue cycles");
  auto* minutes_opt = fuzz->add_option("--minutes", minutes, "stop after N minutes");
  auto* execs_opt = fuzz->add_option("--max-execs", max_execs, "stop after N executions");
  fuzz->add_option("--workers", workers, "parallel executors")->check(CLI::Range(1u, 256u));
  fuzz->add_option("--havoc-budget", havoc_budget, "havoc mutants per entry per cycle");
  fuzz->add_flag("--tree-same-kind", same_kind, "replace subtrees only by same-rule subtrees");
  fuzz->add_flag("--no-tree", no_tree, "disable tree mutation");
  fuzz->add_option("--dictionary-mode", dict_mode, "enhanced, naive or off")
      ->check(CLI::IsMember({"enhanced", "naive", "off"}));
  fuzz->add_flag("--no-auto-dict", no_auto_dict, "do not extract tokens from grammar and seeds");
  fuzz->add_flag("--builtin-trim", builtin_trim_only, "use chunked trimming only");
  fuzz->add_flag("--no-det", no_det, "skip deterministic stages");
  fuzz->add_flag("--no-distill", no_distill, "fuzz every seed");
  fuzz->add_flag("--no-strip-comments", no_strip, "keep comments in seeds");
  fuzz->add_flag("--stats-timing", stats_timing, "write measured times into stats.csv");

  // cmin
  auto* cmin = app.add_subcommand("cmin", "distill a seed corpus");
  TargetFlags cmin_target;
  std::vector<std::string> cmin_seeds;
  std::string cmin_out;
  cmin_target.add_to(cmin);
  cmin->add_option("--seeds", cmin_seeds, "seed directory (repeatable)")->required();
  cmin->add_option("--out", cmin_out, "directory for the kept seeds")->required();

  // trim
  auto* trim = app.add_subcommand("trim", "trim one input");
  TargetFlags trim_target;
  std::string trim_input, trim_grammar, trim_output;
  bool trim_builtin = false;
  trim->add_option("--input", trim_input, "input file")->required();
  trim->add_option("--grammar", trim_grammar, "grammar file")->required();
  trim_target.add_to(trim);
  trim->add_option("--output", trim_output, "trimmed file (default INPUT.trimmed)");
  trim->add_flag("--builtin", trim_builtin, "chunked trimming only");

  // mutate
  auto* mutate = app.add_subcommand("mutate", "write the mutants of one strategy");
  std::string mut_input, mut_grammar, mut_partner, mut_out, mut_strategy, mut_dict;
  std::uint64_t mut_seed = 0;
  std::size_t mut_count = 64;
  bool mut_same_kind = false;
  mutate->add_option("--input", mut_input, "input file")->required();
  mutate->add_option("--grammar", mut_grammar, "grammar file (tree, dictionary)");
  mutate->add_option("--strategy", mut_strategy,
                     "flip1..interest32, havoc, splice, dict, dict-naive, tree")
      ->required();
  mutate->add_option("--partner", mut_partner, "second input for splice and tree");
  mutate->add_option("--dict", mut_dict, "dictionary file");
  mutate->add_option("--rng-seed", mut_seed, "random seed");
  mutate->add_option("--count", mut_count, "mutants for havoc and splice");
  mutate->add_flag("--tree-same-kind", mut_same_kind, "same-rule replacements only");
  mutate->add_option("--out", mut_out, "directory for the mutants")->required();

  // report
  auto* report = app.add_subcommand("report", "strategy comparison CSVs and plots");
  std::string rep_out, rep_dir;
  report->add_option("--out", rep_out, "campaign output directory")->required();
  report->add_option("--report-dir", rep_dir, "where to write (default OUT/report)");

  // replay
  auto* replay = app.add_subcommand("replay", "rerun a campaign from its manifest");
  std::string rep_manifest, replay_out;
  replay->add_option("--manifest", rep_manifest, "manifest.json of the original run")->required();
  replay->add_option("--out", replay_out, "fresh output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*fuzz) {
      CampaignConfig c;
      c.grammar_path = grammar;
      grammar_or_config_error(grammar);
      c.target = fuzz_target.resolve();
      for (const auto& s : seeds) {
        if (!fs::exists(s)) throw ConfigError("seed path not found: " + s);
        c.seed_dirs.emplace_back(s);
      }
      c.out_dir = out;
      if (fs::exists(c.out_dir) && !fs::is_empty(c.out_dir))
        throw ConfigError("output directory is not empty: " + out);
      if (!dict.empty()) {
        try {
          load_dictionary_file(dict);
        } catch (const std::exception& e) {
          throw ConfigError(dict + ": " + e.what());
        }
        c.dict_path = dict;
      }
      c.rng_seed = rng_seed;
      c.workers = workers;
      c.havoc_budget = havoc_budget;
      if (cycles_opt->count()) c.cycles = cycles;
      if (minutes_opt->count()) c.minutes = minutes;
      if (execs_opt->count()) c.max_execs = max_execs;
      c.tree_mutation = !no_tree;
      c.tree_same_kind = same_kind;
      c.grammar_trim = !builtin_trim_only;
      c.dictionary = dict_mode == "naive" ? DictionaryMode::naive
                     : dict_mode == "off" ? DictionaryMode::off
                                          : DictionaryMode::enhanced;
      c.auto_dictionary = !no_auto_dict;
      c.deterministic = !no_det;
      c.distill = !no_distill;
      c.strip_seed_comments = !no_strip;
      c.deterministic_stats = !stats_timing;
      try {
        Executor probe(c.target);
      } catch (const ExecError& e) {
        throw ConfigError(e.what());
      }

      std::signal(SIGINT, on_sigint);
      std::signal(SIGTERM, on_sigint);
      CampaignHooks hooks;
      hooks.on_status = [](const CampaignStatus& s) { std::cout << status_line(s) << std::endl; };
      return print_report(run_campaign(c, hooks));
    }

    if (*cmin) {
      auto spec = cmin_target.resolve();
      std::vector<fs::path> dirs(cmin_seeds.begin(), cmin_seeds.end());
      auto corpus = load_seed_dirs(dirs);
      BatchRunner runner(spec, 1);
      auto d = distill_corpus(corpus, runner);
      fs::create_directories(cmin_out);
      std::size_t k = 0;
      for (auto i : d.kept) {
        char name[32];
        std::snprintf(name, sizeof name, "seed%04zu", k++);
        write_output(fs::path(cmin_out) / name, corpus[i]);
      }
      std::cout << "seeds " << corpus.size() << " kept " << d.kept.size() << " failed "
                << d.crashed.size() << "\n";
      return 0;
    }

    if (*trim) {
      if (!fs::is_regular_file(trim_input)) throw ConfigError("input not found: " + trim_input);
      auto g = grammar_or_config_error(trim_grammar);
      Executor ex(trim_target.resolve());
      Bytes in = read_input(trim_input);
      TrimOracle oracle = [&](ByteView c) {
        auto r = ex.run_compact(c);
        if (r.status != ExecStatus::ok) return CoverageSignature{~std::uint64_t{0} - static_cast<std::uint64_t>(r.status)};
        return r.signature;
      };
      TrimOptions opt;
      opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature) {
        if (a.accepted)
          std::cout << "removed [" << a.removed.start << "," << a.removed.end << ") "
                    << a.removed.size() << " bytes\n";
      };
      auto base = oracle(in);
      auto t = trim_builtin ? builtin_trim(in, oracle, base, opt) : tree_trim(in, g, oracle, base, opt);
      if (trim_builtin) t.still_parses = parse(g, t.trimmed).ok();
      fs::path outp = trim_output.empty() ? fs::path(trim_input + ".trimmed") : fs::path(trim_output);
      write_output(outp, t.trimmed);
      std::cout << "original " << in.size() << "\ntrimmed " << t.trimmed.size() << "\nremoved "
                << t.bytes_removed << "\nmode " << to_string(t.mode) << "\nstill_parses "
                << (t.still_parses ? "true" : "false") << "\nexecutions " << t.executions_used
                << "\noutput " << outp.string() << "\n";
      if (t.error) {
        std::cerr << "trim stopped early: " << *t.error << "\n";
        return 1;
      }
      return 0;
    }

    if (*mutate) {
      if (!fs::is_regular_file(mut_input)) throw ConfigError("input not found: " + mut_input);
      Bytes in = read_input(mut_input);
      Rng rng(mut_seed);
      MutationBatch b;
      auto need_grammar = [&] {
        if (mut_grammar.empty()) throw ConfigError("--grammar is required for " + mut_strategy);
        return grammar_or_config_error(mut_grammar);
      };
      auto partner = [&] {
        if (mut_partner.empty()) throw ConfigError("--partner is required for " + mut_strategy);
        return read_input(mut_partner);
      };
      auto st = strategy_from_string(mut_strategy);
      if (st && std::find(kDeterministicStages.begin(), kDeterministicStages.end(), *st) !=
                    kDeterministicStages.end()) {
        b = deterministic_stage(in, *st);
      } else if (mut_strategy == "havoc") {
        b = havoc(in, rng, mut_count);
      } else if (mut_strategy == "splice") {
        Bytes p = partner();
        b.strategy = Strategy::splice;
        for (std::size_t i = 0; i < mut_count; ++i)
          if (auto s = splice_inputs(in, p, rng)) b.mutants.push_back(*s);
        b.generated_count = b.mutants.size();
      } else if (mut_strategy == "dict" || mut_strategy == "dict-naive") {
        Dictionary d;
        if (!mut_dict.empty()) merge_dictionary(d, load_dictionary_file(mut_dict));
        if (!mut_grammar.empty()) merge_dictionary(d, extract_auto_tokens({in}, need_grammar()));
        if (d.empty()) throw ConfigError("dictionary is empty; pass --dict or --grammar");
        b = mut_strategy == "dict" ? dictionary_mutate(in, d) : naive_dictionary_mutate(in, d);
      } else if (mut_strategy == "tree") {
        auto g = need_grammar();
        Bytes p = mut_partner.empty() ? in : partner();
        TreeMutationLimits lim;
        lim.same_kind = mut_same_kind;
        b = tree_mutate(in, p, g, rng, lim);
      } else {
        throw ConfigError("unknown strategy '" + mut_strategy + "'");
      }
      fs::create_directories(mut_out);
      for (std::size_t i = 0; i < b.mutants.size(); ++i) {
        char name[64];
        Strategy tag = b.tags.empty() ? b.strategy : b.tags[i];
        std::snprintf(name, sizeof name, "m%06zu_%s", i, to_string(tag));
        write_output(fs::path(mut_out) / name, b.mutants[i]);
      }
      std::cout << "mutants " << b.mutants.size() << " generated " << b.generated_count << "\n";
      return 0;
    }

    if (*report) {
      fs::path dir = rep_dir.empty() ? fs::path(rep_out) / "report" : fs::path(rep_dir);
      ReportSummary s;
      try {
        s = write_report(rep_out, dir);
      } catch (const ReportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      for (const auto& p : s.written) std::cout << "wrote " << p.string() << "\n";
      if (s.dict_naive)
        std::cout << "dictionary mutants: enhanced " << s.dict_enhanced << " naive " << s.dict_naive
                  << "\n";
      return 0;
    }

    if (*replay) {
      CampaignConfig c;
      try {
        c = config_from_manifest(rep_manifest);
      } catch (const CampaignError& e) {
        throw ConfigError(e.what());
      }
      fs::path original = c.out_dir;
      c.out_dir = replay_out;
      auto r = run_campaign(c);
      print_report(r);
      auto before = read_admitted_hashes(original);
      bool same = before == r.admitted_hashes;
      std::cout << "admissions original " << before.size() << " replay " << r.admitted_hashes.size()
                << (same ? " identical" : " DIFFERENT") << "\n";
      return same ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
