// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "generator.hpp"
#include "gramfuzz/campaign.hpp"
#include "gramfuzz/coverage.hpp"
#include "gramfuzz/mutate.hpp"
#include "gramfuzz/parse_tree.hpp"
#include "gramfuzz/trim.hpp"
#include "oracles.hpp"

using namespace gramfuzz;
using namespace gramfuzz::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const GrammarSpec& minijs() {
  static GrammarSpec g = load_grammar_file(grammar_file("minijs.g"));
  return g;
}
const GrammarSpec& plist() {
  static GrammarSpec g = load_grammar_file(grammar_file("plist-xml.g"));
  return g;
}

TargetSpec direct(const std::string& name) {
  auto t = *builtin_target(name);
  t.isolation = Isolation::direct;
  return t;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Criteria 1 and 2 share one batch of trim runs.
struct TrimRuns {
  std::size_t inputs = 0, tree_mode = 0, reparsed = 0;
  std::size_t accepted = 0, accepted_preserved = 0;
  std::size_t bytes_in = 0, bytes_out = 0;
  double secs = 0;
};

const TrimRuns& trim_runs() {
  static TrimRuns r = [] {
    TrimRuns out;
    auto t0 = Clock::now();
    struct Case {
      const GrammarSpec* g;
      const char* target;
      std::uint64_t seed;
    };
    for (Case c : {Case{&minijs(), "minijs", 101}, Case{&plist(), "xml", 102}}) {
      Executor ex(direct(c.target));
      auto oracle = [&](ByteView in) {
        auto res = ex.run_compact(in);
        if (res.status != ExecStatus::ok) return CoverageSignature{~res.signature.digest};
        return res.signature;
      };
      InputGenerator gen(*c.g, c.seed, {8, 200, 10});
      for (const auto& in : gen.generate(110, 20000)) {
        ++out.inputs;
        auto base = oracle(in);
        TrimOptions opt;
        opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature sig) {
          if (!a.accepted) return;
          ++out.accepted;
          out.accepted_preserved += sig == base;
        };
        auto res = tree_trim(in, *c.g, oracle, base, opt);
        out.bytes_in += in.size();
        out.bytes_out += res.trimmed.size();
        if (res.mode != TrimMode::tree) continue;
        ++out.tree_mode;
        out.reparsed += parse(*c.g, res.trimmed).ok() && oracle(res.trimmed) == base;
      }
    }
    out.secs = seconds_since(t0);
    return out;
  }();
  return r;
}

Verdict c1() {
  const auto& r = trim_runs();
  bool ok = r.inputs >= 200 && r.tree_mode == r.inputs && r.reparsed == r.tree_mode && r.secs < 120;
  return {ok, fmt("%zu inputs, %zu tree-mode outcomes, %zu reparse; %.1f%% of bytes removed; %.1fs", r.inputs,
                  r.tree_mode, r.reparsed, 100.0 * static_cast<double>(r.bytes_in - r.bytes_out) /
                                                   static_cast<double>(r.bytes_in),
                  r.secs)};
}

Verdict c2() {
  const auto& r = trim_runs();
  return {r.accepted > 0 && r.accepted_preserved == r.accepted,
          fmt("%zu/%zu accepted steps kept the signature", r.accepted_preserved, r.accepted)};
}

Verdict c3() {
  std::size_t lengths = 0, mismatches = 0;
  for (std::size_t len = 1; len <= 6000; len += len < 300 ? 1 : 37) {
    ++lengths;
    std::vector<std::size_t> want;
    for (std::size_t n = kTrimFirstDivisor; n <= kTrimLastDivisor; n *= 2)
      if (len / n >= kTrimMinChunk) want.push_back(len / n);
    std::vector<std::size_t> got;
    std::size_t last_n = 0, pos = 0;
    bool ok = true;
    TrimOptions opt;
    opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature) {
      if (a.n != last_n) {
        got.push_back(a.removed.size());
        last_n = a.n;
        pos = 0;
      }
      // Chunks tile the input from offset 0; the last may be short.
      ok &= a.removed.start == pos && a.removed.size() == std::min(len / a.n, len - pos);
      pos = a.removed.end;
    };
    Bytes in(len, 'a');
    builtin_trim(in, [](ByteView c) { return CoverageSignature{c.size()}; }, CoverageSignature{len}, opt);
    mismatches += !(ok && got == want);
  }
  return {mismatches == 0, fmt("%zu lengths, %zu schedule mismatches", lengths, mismatches)};
}

Verdict c4() {
  auto t0 = Clock::now();
  InputGenerator gen(minijs(), 104, {8, 200, 10});
  auto corpus = gen.generate(100, 20000);
  Dictionary d = load_dictionary_file(fixture("dict/minijs.dict"));
  merge_dictionary(d, extract_auto_tokens(corpus, minijs()));
  std::uint64_t enhanced = 0, naive = 0;
  for (const auto& in : corpus) {
    enhanced += count_dictionary_mutants(in, d);
    naive += count_naive_dictionary_mutants(in, d);
  }
  // Spot-check the counters against the oracles on a few inputs.
  std::vector<Bytes> toks;
  for (const auto& e : d.entries()) toks.push_back(e.token);
  bool counts_ok = true;
  for (std::size_t i = 0; i < 5 && i < corpus.size(); ++i) {
    counts_ok &= boundary_dictionary_oracle(corpus[i], toks).size() == count_dictionary_mutants(corpus[i], d);
    counts_ok &= per_byte_dictionary_oracle(corpus[i], toks).size() == count_naive_dictionary_mutants(corpus[i], d);
  }
  double ratio = static_cast<double>(enhanced) / static_cast<double>(naive);
  double secs = seconds_since(t0);
  return {corpus.size() == 100 && counts_ok && ratio <= 0.7 && secs < 30,
          fmt("%zu inputs, %zu tokens: enhanced %llu, naive %llu, ratio %.3f; %.1fs", corpus.size(), d.size(),
              static_cast<unsigned long long>(enhanced), static_cast<unsigned long long>(naive), ratio, secs)};
}

Verdict c5() {
  auto g = load_grammar("s := item* ;\nitem := N ;\nN := /[0-9]+/ ;\nWS skip / +/ ;");
  auto list = [](std::size_t n, std::size_t width) {
    Bytes out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += Bytes(width, static_cast<char>('0' + i % 10));
    }
    return out;
  };
  std::size_t pairs = 0, bad = 0;
  Rng rng(5);
  for (std::size_t a = 1; a <= 20; ++a) {
    for (std::size_t b = 0; b <= 20; ++b) {
      ++pairs;
      Bytes tar = list(a, 1), pro = list(b, 2);
      auto batch = tree_mutate(tar, pro, g, rng);
      auto tt = parse(g, tar), pt = parse(g, pro);
      auto all = tree_mutants_oracle(*tt.tree, &*pt.tree);
      bad += !(batch.generated_count == a * (a + b) && all.size() == a * (a + b) && batch.mutants == all);
    }
  }
  // 100 x (100 + 500) candidates, capped at 10,000 mutants.
  auto big = tree_mutate(list(100, 1), list(500, 1), g, rng);
  bool cap = big.generated_count == 60000 && big.mutants.size() == 10000;
  // Pool subtrees over 200 bytes are excluded.
  Bytes wide = "1 " + Bytes(201, '7') + " 2";
  auto pool = tree_mutate("3", wide, g, rng);
  bool pool_ok = pool.generated_count == 1 * (1 + 2);
  // Inputs over 10,000 bytes are skipped.
  Bytes huge = list(5001, 1);
  bool skip_ok = tree_mutate(huge, "1", g, rng).generated_count == 0 &&
                 tree_mutate("1 2", huge, g, rng).generated_count == 2 * 2;
  return {bad == 0 && cap && pool_ok && skip_ok,
          fmt("%zu/%zu (a,b) fixtures equal a*(a+b) by enumeration; 100x600 -> %zu generated, %zu kept; "
              "pool cap %s; size cap %s",
              pairs - bad, pairs, big.generated_count, big.mutants.size(), pool_ok ? "ok" : "FAIL",
              skip_ok ? "ok" : "FAIL")};
}

Verdict c6() {
  auto t0 = Clock::now();
  Rng rng(6);
  GlobalCoverage g;
  BruteCoverage brute;
  std::vector<CoverageMap> seen;
  std::size_t n = 10000, novelty_bad = 0, sig_bad = 0;
  for (std::size_t k = 0; k < n; ++k) {
    CoverageMap m;
    if (!seen.empty() && rng.below(2) == 0) {
      m = seen[rng.below(seen.size())];
      for (int e = 0, edits = static_cast<int>(rng.below(3)); e < edits; ++e)
        m.set(rng.below(2048), static_cast<std::uint8_t>(rng.below(256)));
    } else {
      for (int c = 0, cells = static_cast<int>(rng.below(40)); c < cells; ++c)
        m.set(rng.below(2048), static_cast<std::uint8_t>(1 + rng.below(255)));
    }
    novelty_bad += g.classify(m) != brute.classify(m);
    const auto& other = seen.empty() ? m : seen[rng.below(seen.size())];
    sig_bad += (signature(m) == signature(other)) != bucketized_equal(m, other);
    if (seen.size() < 500) seen.push_back(m);
    else seen[rng.below(seen.size())] = m;
  }
  double secs = seconds_since(t0);
  return {novelty_bad == 0 && sig_bad == 0 && secs < 30,
          fmt("%zu maps: %zu novelty and %zu signature disagreements; %.1fs", n, novelty_bad, sig_bad, secs)};
}

struct DeepRun {
  bool found = false;
  std::uint64_t found_at = 0;
  std::string strategy;
  std::uint64_t execs = 0;
  std::uint64_t grammar_aware = 0, flips = 0;
  std::size_t edges = 0;
};

DeepRun deep_run(bool enabled, std::uint64_t seed, const fs::path& out) {
  CampaignConfig c;
  c.grammar_path = grammar_file("minijs.g");
  c.target = direct("minijs");
  c.seed_dirs = {fixture("minijs/seeds")};
  c.out_dir = out;
  c.rng_seed = seed;
  c.max_execs = 200000;
  c.tree_mutation = enabled;
  c.dictionary = enabled ? DictionaryMode::enhanced : DictionaryMode::naive;
  auto rep = run_campaign(c);
  DeepRun r;
  r.execs = rep.total_execs;
  r.edges = rep.edges;
  for (const auto& cr : rep.crashes)
    if (cr.key == "minijs-rightcontext-underflow" && cr.found_at_exec <= 200000) {
      r.found = true;
      r.found_at = cr.found_at_exec;
      r.strategy = to_string(cr.strategy);
    }
  auto at = [&](Strategy s) { return rep.stats[static_cast<std::size_t>(s)].interesting; };
  r.grammar_aware = at(Strategy::tree) + at(Strategy::uo) + at(Strategy::ao);
  for (Strategy s : {Strategy::flip1, Strategy::flip2, Strategy::flip4, Strategy::flip8, Strategy::flip16,
                     Strategy::flip32})
    r.flips += at(s);
  return r;
}

struct DeepRuns {
  std::vector<DeepRun> on, off;
  double secs = 0;
};

const DeepRuns& deep_runs() {
  static DeepRuns d = [] {
    DeepRuns out;
    auto t0 = Clock::now();
    TempDir tmp("acceptance-deep");
    for (std::uint64_t seed : {1, 2, 3}) {
      out.on.push_back(deep_run(true, seed, tmp / ("on" + std::to_string(seed))));
      out.off.push_back(deep_run(false, seed, tmp / ("off" + std::to_string(seed))));
    }
    out.secs = seconds_since(t0);
    return out;
  }();
  return d;
}

Verdict c7() {
  const auto& d = deep_runs();
  std::size_t on = 0, off = 0;
  std::ostringstream s;
  s << "enabled:";
  for (const auto& r : d.on) {
    on += r.found;
    s << (r.found ? fmt(" exec %llu via %s", static_cast<unsigned long long>(r.found_at), r.strategy.c_str())
                  : std::string(" none"))
      << ",";
  }
  s << " disabled:";
  for (const auto& r : d.off) {
    off += r.found;
    s << (r.found ? fmt(" exec %llu via %s", static_cast<unsigned long long>(r.found_at), r.strategy.c_str())
                  : std::string(" none"))
      << ",";
  }
  s << fmt(" -> %zu/3 vs %zu/3; %.0fs", on, off, d.secs);
  return {on == 3 && off == 0 && d.secs < 900, s.str()};
}

Verdict c8() {
  const auto& d = deep_runs();
  bool ok = true;
  std::ostringstream s;
  for (const auto& r : d.on) {
    ok &= r.grammar_aware > r.flips;
    s << fmt("tree+uo+ao %llu vs flips %llu; ", static_cast<unsigned long long>(r.grammar_aware),
             static_cast<unsigned long long>(r.flips));
  }
  return {ok, s.str()};
}

Verdict c9() {
  TempDir tmp("acceptance-replay");
  bool ok = true;
  std::ostringstream s;
  struct Setup {
    const char* grammar;
    const char* target;
    const char* seeds;
  };
  for (Setup su : {Setup{"minijs.g", "minijs", "minijs/seeds"}, Setup{"plist-xml.g", "xml", "xml/seeds"}}) {
    CampaignConfig c;
    c.grammar_path = grammar_file(su.grammar);
    c.target = direct(su.target);
    c.seed_dirs = {fixture(su.seeds)};
    c.out_dir = tmp / (std::string(su.target) + "_orig");
    c.rng_seed = 9;
    c.cycles = 1;
    c.max_execs = 30000;
    run_campaign(c);
    auto manifest = c.out_dir / "manifest.json";
    std::vector<std::vector<std::uint64_t>> hashes;
    std::vector<Bytes> stats;
    for (int k = 0; k < 2; ++k) {
      auto cfg = config_from_manifest(manifest);
      cfg.out_dir = tmp / (std::string(su.target) + "_replay" + std::to_string(k));
      hashes.push_back(run_campaign(cfg).admitted_hashes);
      stats.push_back(read_file(cfg.out_dir / "stats.csv"));
    }
    bool same = hashes[0] == hashes[1] && stats[0] == stats[1] &&
                hashes[0] == read_admitted_hashes(c.out_dir) && stats[0] == read_file(c.out_dir / "stats.csv");
    ok &= same && !hashes[0].empty();
    s << fmt("%s: %zu admissions, %s; ", su.target, hashes[0].size(), same ? "identical" : "DIFFERENT");
  }
  return {ok, s.str()};
}

Verdict c10() {
  std::size_t total = 0, bad = 0;
  for (auto [g, seed] : {std::pair{&minijs(), 110ull}, std::pair{&plist(), 111ull}}) {
    InputGenerator gen(*g, seed, {9, 300, 15});
    for (const auto& in : gen.generate(500, 50000)) {
      ++total;
      auto r = parse(*g, in);
      bad += !(r.ok() && serialize(*r.tree) == in);
    }
  }
  return {total == 1000 && bad == 0, fmt("%zu inputs, %zu round-trip failures", total, bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"tree-trim validity", c1},
      {"trim signature preservation", c2},
      {"built-in trim schedule", c3},
      {"enhanced dictionary reduction", c4},
      {"tree-mutation combinatorics and caps", c5},
      {"coverage oracle equivalence", c6},
      {"deep-bug experiment", c7},
      {"grammar-aware strategies outgrow flips", c8},
      {"replay determinism", c9},
      {"serialize-parse round trip", c10},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
