#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "generator.hpp"
#include "gramfuzz/campaign.hpp"
#include "gramfuzz/parse_tree.hpp"
#include "oracles.hpp"

using namespace gramfuzz;
using namespace gramfuzz::testing;
namespace fs = std::filesystem;

namespace {

const GrammarSpec& minijs() {
  static GrammarSpec g = load_grammar_file(grammar_file("minijs.g"));
  return g;
}

TargetSpec direct(const std::string& name) {
  auto t = *builtin_target(name);
  t.isolation = Isolation::direct;
  return t;
}

std::set<std::uint32_t> edges(const CompactResult& r) {
  std::set<std::uint32_t> out;
  for (auto [i, c] : r.cells) out.insert(i);
  return out;
}

CampaignConfig xml_config(const fs::path& out) {
  CampaignConfig c;
  c.grammar_path = grammar_file("plist-xml.g");
  c.target = direct("xml");
  c.seed_dirs = {fixture("xml/seeds")};
  c.out_dir = out;
  c.rng_seed = 7;
  c.cycles = 1;
  c.max_execs = 20000;
  c.havoc_budget = 64;
  return c;
}

std::map<std::string, Bytes> dir_contents(const fs::path& d) {
  std::map<std::string, Bytes> out;
  for (const auto& p : list_dir(d)) out[p.filename().string()] = read_file(p);
  return out;
}

}  // namespace

TEST_CASE("distill_corpus examples") {
  BatchRunner runner(direct("minijs"), 1);
  SUBCASE("identical seeds collapse") {
    auto d = distill_corpus({"var x=1;", "var x=1;"}, runner);
    CHECK(d.kept == std::vector<std::size_t>{0});
  }
  SUBCASE("dominated seed is dropped") {
    BatchRunner bytes(direct("fixture"), 1);
    CHECK(distill_corpus({"a", "ab"}, bytes).kept == std::vector<std::size_t>{1});
    CHECK(distill_corpus({"a", "abcd", "ab", "ba"}, bytes).kept == std::vector<std::size_t>{1, 3});
  }
  SUBCASE("crashing seeds are dropped; all crashing is an error") {
    Bytes bug = read_file(fixture("minijs/planted_bug.js"));
    auto d = distill_corpus({bug, "var x=1;"}, runner);
    CHECK(d.kept == std::vector<std::size_t>{1});
    CHECK(d.crashed == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(distill_corpus({bug}, runner), CampaignError);
    CHECK_THROWS_AS(distill_corpus(std::vector<Bytes>{}, runner), CampaignError);
  }
}

TEST_CASE("distill_corpus covers the union of edges") {
  InputGenerator gen(minijs(), 41, {7, 120, 10});
  auto seeds = gen.generate(50, 5000);
  REQUIRE(seeds.size() == 50);
  BatchRunner runner(direct("minijs"), 1);
  auto d = distill_corpus(seeds, runner);
  std::set<std::uint32_t> all, kept;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (d.results[i].status == ExecStatus::ok) {
      auto e = edges(d.results[i]);
      all.insert(e.begin(), e.end());
    }
  for (auto k : d.kept) {
    auto e = edges(d.results[k]);
    kept.insert(e.begin(), e.end());
  }
  CHECK(kept == all);
  CHECK(d.kept.size() < seeds.size());
  CHECK(std::is_sorted(d.kept.begin(), d.kept.end()));
  // Every kept seed adds something over the others taken before it.
  CHECK(distill_corpus(seeds, runner).kept == d.kept);
}

TEST_CASE("strip_comments") {
  CHECK(strip_comments("var x=1;/*c*/", minijs()) == "var x=1;");
  CHECK(strip_comments("var x=1;", minijs()) == "var x=1;");
  CHECK(strip_comments("var/*c*/x=1;", minijs()) == "var x=1;");
  CHECK(strip_comments("var x=1; // tail\nprint(x);", minijs()) == "var x=1; \nprint(x);");
  Bytes multi = "var a = 1;\n/* one\n   two\n   three */\nvar b = 2;\n";
  Bytes out = strip_comments(multi, minijs());
  CHECK(out.find("two") == Bytes::npos);
  CHECK(parse(minijs(), out).ok());
  CHECK(strip_comments("var x=;/*c*/", minijs()) == "var x=;/*c*/");
  CHECK(strip_comments("var s = \"/*not*/\";", minijs()) == "var s = \"/*not*/\";");
}

TEST_CASE("BatchRunner: parallel equals serial") {
  InputGenerator gen(minijs(), 5, {7, 120, 10});
  auto inputs = gen.generate(120, 5000);
  inputs.push_back(read_file(fixture("minijs/planted_bug.js")));
  for (Isolation iso : {Isolation::direct, Isolation::fork_server}) {
    auto t = *builtin_target("minijs");
    t.isolation = iso;
    BatchRunner serial(t, 1), parallel(t, 4);
    CHECK(parallel.workers() == 4);
    auto a = serial.run_serial(inputs);
    auto b = parallel.run_parallel(inputs);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].status == b[i].status);
      CHECK(a[i].signature == b[i].signature);
      CHECK(a[i].cells == b[i].cells);
      CHECK(a[i].crash_token == b[i].crash_token);
    }
    CHECK(a.back().status == ExecStatus::crash);
  }
}

TEST_CASE("run_campaign: zero cycles runs the seeds only") {
  TempDir tmp("camp0");
  auto cfg = xml_config(tmp / "out");
  cfg.cycles = 0;
  auto rep = run_campaign(cfg);
  CHECK(rep.total_execs == rep.seed_execs);
  CHECK(rep.cycles_completed == 0);
  CHECK_FALSE(rep.queue.empty());
  CHECK(list_dir(tmp / "out" / "queue").size() == rep.queue.size());
  for (const auto& e : rep.queue) CHECK(e.strategy == Strategy::seed);
  CHECK(fs::exists(tmp / "out" / "manifest.json"));
  CHECK(fs::exists(tmp / "out" / "stats.csv"));
}

TEST_CASE("run_campaign: invariants on a short xml run") {
  TempDir tmp("campinv");
  auto cfg = xml_config(tmp / "out");
  GlobalCoverage replica;
  std::uint64_t last_id = 0;
  bool first = true;
  std::size_t last_edges = 0;
  CampaignHooks hooks;
  hooks.on_admit = [&](const QueueEntry& e, const CompactResult& r) {
    if (!first) CHECK(e.id == last_id + 1);
    first = false;
    last_id = e.id;
    CHECK_FALSE(e.data.empty());
    CHECK(e.signature == r.signature);
    auto novelty = replica.classify(expand(r.cells));
    if (e.strategy != Strategy::seed) CHECK(novelty != Novelty::none);
    CHECK(replica.edges_covered() >= last_edges);
    last_edges = replica.edges_covered();
  };
  auto rep = run_campaign(cfg, hooks);

  std::uint64_t generated = 0;
  for (std::size_t i = 1; i < kStrategyCount; ++i) generated += rep.stats[i].generated;
  CHECK(generated == rep.total_execs - rep.seed_execs - rep.trim_execs);
  CHECK(rep.total_execs >= 20000);
  CHECK(rep.queue.size() > 4);
  CHECK(rep.edges == replica.edges_covered());

  // Queue files carry the admitting strategy; data matches the entry.
  auto files = list_dir(tmp / "out" / "queue");
  REQUIRE(files.size() == rep.queue.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& e = rep.queue[i];
    std::string name = files[i].filename().string();
    CHECK(name.substr(name.find('_') + 1) == to_string(e.strategy));
    CHECK(read_file(files[i]) == e.data);
    if (e.parent) CHECK(*e.parent < e.id);
  }
  CHECK(read_admitted_hashes(tmp / "out") == rep.admitted_hashes);

  // Non-empty output directory is refused.
  CHECK_THROWS_AS(run_campaign(cfg), CampaignError);
}

TEST_CASE("run_campaign: equal configs give identical outputs") {
  TempDir tmp("campdet");
  auto a = run_campaign(xml_config(tmp / "a"));
  auto b = run_campaign(xml_config(tmp / "b"));
  CHECK(a.admitted_hashes == b.admitted_hashes);
  CHECK(dir_contents(tmp / "a" / "queue") == dir_contents(tmp / "b" / "queue"));
  CHECK(read_file(tmp / "a" / "stats.csv") == read_file(tmp / "b" / "stats.csv"));

  auto cfg = config_from_manifest(tmp / "a" / "manifest.json");
  CHECK(cfg.rng_seed == 7);
  CHECK(cfg.max_execs == std::optional<std::uint64_t>(20000));
  CHECK(cfg.target.name == "xml");
  CHECK(cfg.target.isolation == Isolation::direct);
  cfg.out_dir = tmp / "replay";
  CHECK(run_campaign(cfg).admitted_hashes == a.admitted_hashes);

  // Only the random stages depend on the seed.
  auto seven = xml_config(tmp / "c7");
  seven.deterministic = false;
  auto eight = xml_config(tmp / "c8");
  eight.deterministic = false;
  eight.rng_seed = 8;
  CHECK(run_campaign(seven).admitted_hashes != run_campaign(eight).admitted_hashes);
}

TEST_CASE("run_campaign: parallel workers keep the single-worker results") {
  TempDir tmp("campwork");
  auto one = run_campaign(xml_config(tmp / "one"));
  auto cfg = xml_config(tmp / "four");
  cfg.workers = 4;
  auto four = run_campaign(cfg);
  CHECK(four.admitted_hashes == one.admitted_hashes);
  CHECK(four.total_execs == one.total_execs);
}

TEST_CASE("run_campaign: crashes are deduplicated by token") {
  TempDir tmp("campcrash");
  fs::create_directories(tmp / "seeds");
  write_file(tmp / "seeds" / "a", "CRASI");
  write_file(tmp / "seeds" / "b", "CRASJ");
  write_file(tmp / "g.g", "s := W ;\nW := /[A-Z]+/ ;\n");
  CampaignConfig c;
  c.grammar_path = tmp / "g.g";
  c.target = direct("fixture");
  c.seed_dirs = {tmp / "seeds"};
  c.out_dir = tmp / "out";
  c.rng_seed = 1;
  c.cycles = 1;
  c.max_execs = 3000;
  auto rep = run_campaign(c);
  REQUIRE(rep.crashes.size() == 1);
  CHECK(rep.crashes[0].key == "fixture-crash");
  CHECK(rep.crashes[0].count >= 2);
  CHECK(rep.crashes[0].strategy == Strategy::flip1);
  CHECK(list_dir(tmp / "out" / "crashes").size() == 1);
  CHECK(read_file(rep.crashes[0].file).rfind("CRASH", 0) == 0);
}

TEST_CASE("run_campaign: configuration errors") {
  TempDir tmp("camperr");
  auto cfg = xml_config(tmp / "out");
  cfg.grammar_path = tmp / "missing.g";
  CHECK_THROWS(run_campaign(cfg));
  cfg = xml_config(tmp / "out2");
  cfg.seed_dirs = {tmp / "no_such_dir"};
  CHECK_THROWS(run_campaign(cfg));
}
