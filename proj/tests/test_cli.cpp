#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "gramfuzz/campaign.hpp"
#include "gramfuzz/parse_tree.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace gramfuzz;
using namespace gramfuzz::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(GRAMFUZZ_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = ::pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string xml_fuzz_args(const fs::path& out) {
  return "fuzz --grammar " + q(grammar_file("plist-xml.g")) + " --target xml --isolation direct --seeds " +
         q(fixture("xml/seeds")) + " --out " + q(out) + " --cycles 1 --rng-seed 7 --max-execs 20000";
}

std::string field(const std::string& out, const std::string& key) {
  auto at = out.find("\n" + key + " ");
  REQUIRE(at != std::string::npos);
  at += key.size() + 2;
  return out.substr(at, out.find('\n', at) - at);
}

}  // namespace

TEST_CASE("cli: usage and config errors exit 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  auto r = cli("fuzz --target xml --seeds x --out y");
  CHECK(r.code == 2);
  CHECK(r.out.find("--grammar") != std::string::npos);
  CHECK(cli("fuzz --grammar g --target xml --seeds x --out y --bogus").code == 2);

  TempDir tmp("cli2");
  auto base = "--grammar " + q(grammar_file("plist-xml.g")) + " --seeds " + q(fixture("xml/seeds"));
  CHECK(cli("fuzz " + base + " --target nope --out " + q(tmp / "a")).code == 2);
  CHECK(cli("fuzz --grammar " + q(tmp / "missing.g") + " --target xml --seeds " + q(fixture("xml/seeds")) +
            " --out " + q(tmp / "b"))
            .code == 2);
  CHECK(cli("fuzz " + base + " --target xml --dict " + q(tmp / "none.dict") + " --out " + q(tmp / "c")).code == 2);
  CHECK(cli("trim --input " + q(tmp / "missing.js") + " --grammar " + q(grammar_file("minijs.g")) +
            " --target minijs")
            .code == 2);
  CHECK(cli("report --out " + q(tmp / "nothing") + " --report-dir " + q(tmp / "r")).code == 2);
}

TEST_CASE("cli: fuzz output matches the golden manifest") {
  TempDir tmp("clifuzz");
  auto r = cli(xml_fuzz_args(tmp / "out"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("cycle ") != std::string::npos);
  CHECK(r.out.find(" edges ") != std::string::npos);

  auto got = nlohmann::json::parse(read_file(tmp / "out" / "manifest.json"));
  CHECK(got["grammar"] == fs::absolute(grammar_file("plist-xml.g")).lexically_normal().string());
  got["grammar"] = "@GRAMMAR@";
  got["seed_dirs"] = {"@SEEDS@"};
  got["out_dir"] = "@OUT@";
  auto want = nlohmann::json::parse(read_file(fixture("golden/manifest.json")));
  CHECK(got == want);

  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(tmp / "out")) names.insert(e.path().filename().string());
  CHECK(names == std::set<std::string>{"admissions.csv", "crashes", "dictionary.csv", "dictionary.txt",
                                       "hangs", "manifest.json", "queue", "stats.csv", "timing.csv"});
  CHECK(read_file(tmp / "out" / "stats.csv").rfind("cycle,strategy,generated,interesting,parse_ms,mutate_ms,exec_ms\n", 0) == 0);
  CHECK_FALSE(list_dir(tmp / "out" / "queue").empty());

  // Output directory must be fresh.
  CHECK(cli(xml_fuzz_args(tmp / "out")).code == 2);

  auto rep = cli("report --out " + q(tmp / "out") + " --report-dir " + q(tmp / "report"));
  CHECK(rep.code == 0);
  CHECK(fs::exists(tmp / "report" / "cumulative.svg"));
  CHECK(fs::exists(tmp / "report" / "ratio.csv"));
}

TEST_CASE("cli: same seed twice gives identical stats.csv; replay reproduces admissions") {
  TempDir tmp("clidet");
  REQUIRE(cli(xml_fuzz_args(tmp / "a") + " --workers 1").code == 0);
  REQUIRE(cli(xml_fuzz_args(tmp / "b") + " --workers 1").code == 0);
  CHECK(read_file(tmp / "a" / "stats.csv") == read_file(tmp / "b" / "stats.csv"));

  auto r = cli("replay --manifest " + q(tmp / "a" / "manifest.json") + " --out " + q(tmp / "c"));
  CHECK(r.code == 0);
  CHECK(read_admitted_hashes(tmp / "c") == read_admitted_hashes(tmp / "a"));
  CHECK(read_file(tmp / "c" / "stats.csv") == read_file(tmp / "a" / "stats.csv"));
}

TEST_CASE("cli: trim") {
  TempDir tmp("clitrim");
  auto js = q(grammar_file("minijs.g"));
  SUBCASE("whole statement removal") {
    fs::copy_file(fixture("trim/redundant_try_catch.js"), tmp / "in.js");
    auto r = cli("trim --input " + q(tmp / "in.js") + " --grammar " + js + " --target minijs --isolation direct");
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "mode") == "tree");
    CHECK(field(r.out, "still_parses") == "true");
    const Bytes stmt = "try { throw \"{}\"; } catch (ex) {}";
    Bytes in = read_file(tmp / "in.js");
    auto at = in.find(stmt);
    CHECK(r.out.rfind("removed [" + std::to_string(at) + "," + std::to_string(at + stmt.size()) + ")", 0) == 0);
    CHECK(std::stoul(field(r.out, "removed")) == stmt.size());
    Bytes trimmed = read_file(tmp / "in.js.trimmed");
    CHECK(parse(load_grammar_file(grammar_file("minijs.g")), trimmed).ok());
  }
  SUBCASE("already minimal") {
    write_file(tmp / "min.js", "var x=1;");
    auto r = cli("trim --input " + q(tmp / "min.js") + " --grammar " + js + " --target minijs --isolation direct");
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "removed") == "0");
  }
  SUBCASE("invalid input falls back") {
    write_file(tmp / "bad.js", "var x=; print(1); print(1);");
    auto r = cli("trim --input " + q(tmp / "bad.js") + " --grammar " + js + " --target minijs --isolation direct" +
                 " --output " + q(tmp / "o.js"));
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "mode") == "builtin_fallback");
    CHECK(fs::exists(tmp / "o.js"));
  }
}

TEST_CASE("cli: mutate and cmin") {
  TempDir tmp("climut");
  auto in = q(fixture("minijs/seeds/06_numbers.js"));
  auto r = cli("mutate --input " + in + " --grammar " + q(grammar_file("minijs.g")) +
               " --strategy tree --rng-seed 1 --out " + q(tmp / "tree"));
  REQUIRE(r.code == 0);
  bool found = false;
  for (const auto& p : list_dir(tmp / "tree"))
    found |= read_file(p).find("var y = Number(x);") != Bytes::npos;
  CHECK(found);

  r = cli("mutate --input " + in + " --grammar " + q(grammar_file("minijs.g")) + " --strategy flip8 --out " +
          q(tmp / "flip"));
  REQUIRE(r.code == 0);
  CHECK(list_dir(tmp / "flip").size() == read_file(fixture("minijs/seeds/06_numbers.js")).size());
  CHECK(cli("mutate --input " + in + " --grammar " + q(grammar_file("minijs.g")) + " --strategy nope --out " +
            q(tmp / "x"))
            .code == 2);

  r = cli("cmin --target xml --isolation direct --seeds " + q(fixture("xml/seeds")) + " --out " + q(tmp / "cmin"));
  REQUIRE(r.code == 0);
  auto kept = list_dir(tmp / "cmin");
  CHECK_FALSE(kept.empty());
  CHECK(kept.size() <= list_dir(fixture("xml/seeds")).size());
}

TEST_CASE("cli: external command target") {
  TempDir tmp("cliext");
  fs::create_directories(tmp / "seeds");
  write_file(tmp / "seeds" / "a", "hello");
  write_file(tmp / "g.g", "s := W ;\nW := /[a-zA-Z]+/ ;\n");
  auto r = cli("fuzz --grammar " + q(tmp / "g.g") + " --cmd '" + std::string(GRAMFUZZ_EXT_TARGET) +
               " @@' --seeds " + q(tmp / "seeds") + " --out " + q(tmp / "out") +
               " --cycles 1 --max-execs 300 --timeout-ms 500");
  CHECK(r.code == 0);
  CHECK(list_dir(tmp / "out" / "queue").size() >= 1);
}
