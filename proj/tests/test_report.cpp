#include <filesystem>
#include <map>
#include <sstream>

#include "doctest.h"
#include "gramfuzz/campaign.hpp"
#include "gramfuzz/report.hpp"
#include "oracles.hpp"

using namespace gramfuzz;
using namespace gramfuzz::testing;
namespace fs = std::filesystem;

namespace {

CampaignConfig xml_config(const fs::path& out, std::uint64_t cycles) {
  CampaignConfig c;
  c.grammar_path = grammar_file("plist-xml.g");
  c.target = *builtin_target("xml");
  c.target.isolation = Isolation::direct;
  c.seed_dirs = {fixture("xml/seeds")};
  c.out_dir = out;
  c.rng_seed = 3;
  c.cycles = cycles;
  c.max_execs = 15000;
  c.havoc_budget = 64;
  return c;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::vector<std::vector<std::string>> out;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_CASE("report on an empty campaign") {
  TempDir tmp("rep0");
  run_campaign(xml_config(tmp / "out", 0));
  auto sum = write_report(tmp / "out", tmp / "report");
  CHECK(fs::exists(tmp / "report" / "phases.csv"));
  for (const char* f : {"cumulative.csv", "cumulative_exec.csv", "ratio.csv", "dictionary.csv"}) {
    CHECK(fs::exists(tmp / "report" / f));
    auto text = read_file(tmp / "report" / f);
    CHECK(text.find('\n') == text.size() - 1);  // header only
  }
  for (const auto& p : sum.written) CHECK(p.extension() != ".svg");
  CHECK(list_dir(tmp / "report").size() == sum.written.size());
}

TEST_CASE("report on a short campaign") {
  TempDir tmp("rep1");
  // A short seed so the deterministic and dictionary stages finish early.
  fs::create_directories(tmp / "seeds");
  write_file(tmp / "seeds" / "s", "<plist><string>ab</string></plist>");
  auto cfg = xml_config(tmp / "out", 1);
  cfg.seed_dirs = {tmp / "seeds"};
  auto rep = run_campaign(cfg);
  auto sum = write_report(tmp / "out", tmp / "report");
  CHECK(fs::exists(tmp / "report" / "cumulative.svg"));
  CHECK(fs::exists(tmp / "report" / "ratio.svg"));

  for (const auto& r : csv_rows(tmp / "report" / "ratio.csv")) {
    double q = std::stod(r[4]);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }

  // Cumulative curves recomputed from the raw stats.
  auto raw = read_stats_csv(tmp / "out" / "stats.csv");
  std::map<Strategy, double> running;
  std::map<std::pair<Strategy, std::uint64_t>, double> want;
  for (const auto& r : raw) want[{r.strategy, r.cycle}] = running[r.strategy] += r.interesting;
  std::map<std::string, double> last;
  std::size_t points = 0;
  for (const auto& r : csv_rows(tmp / "report" / "cumulative.csv")) {
    auto st = *strategy_from_string(r[1]);
    double y = std::stod(r[2]);
    CHECK(y == want.at({st, std::stoull(r[0])}));
    CHECK(y >= last[r[1]]);
    last[r[1]] = y;
    ++points;
  }
  CHECK(points > 0);

  std::map<std::string, double> last_exec;
  for (const auto& r : csv_rows(tmp / "report" / "cumulative_exec.csv")) {
    double y = std::stod(r[2]);
    CHECK(y >= last_exec[r[1]]);
    last_exec[r[1]] = y;
  }
  double admitted = 0, seeds = 0;
  for (auto& [k, v] : last_exec) admitted += v;
  for (const auto& q : rep.queue) seeds += q.strategy == Strategy::seed;
  CHECK(admitted == static_cast<double>(rep.queue.size()) - seeds);

  CHECK(sum.dict_enhanced > 0);
  CHECK(sum.dict_enhanced <= sum.dict_naive);
}

TEST_CASE("report errors") {
  TempDir tmp("reperr");
  fs::create_directories(tmp / "out");
  CHECK_THROWS_AS(write_report(tmp / "out", tmp / "report"), ReportError);
  write_file(tmp / "out" / "stats.csv", "cycle,strategy\n");
  CHECK_THROWS_AS(write_report(tmp / "out", tmp / "report"), ReportError);
  write_file(tmp / "out" / "stats.csv",
             "cycle,strategy,generated,interesting,parse_ms,mutate_ms,exec_ms\n0,bogus,1,0,0,0,0\n");
  CHECK_THROWS_AS(write_report(tmp / "out", tmp / "report"), ReportError);
  write_file(tmp / "out" / "stats.csv",
             "cycle,strategy,generated,interesting,parse_ms,mutate_ms,exec_ms\n0,tree,1,2,0,0,0\n");
  CHECK_THROWS_AS(write_report(tmp / "out", tmp / "report"), ReportError);
  write_file(tmp / "out" / "stats.csv",
             "cycle,strategy,generated,interesting,parse_ms,mutate_ms,exec_ms\n0,tree,x,0,0,0,0\n");
  CHECK_THROWS_AS(write_report(tmp / "out", tmp / "report"), ReportError);
}

TEST_CASE("cumulative series") {
  std::vector<StatsRow> rows = {{0, Strategy::tree, 10, 2}, {0, Strategy::havoc, 10, 1},
                                {1, Strategy::tree, 10, 0}, {1, Strategy::havoc, 10, 4}};
  auto c = cumulative_by_cycle(rows);
  CHECK(c[Strategy::tree] == Series{{0, 2}, {1, 2}});
  CHECK(c[Strategy::havoc] == Series{{0, 1}, {1, 5}});

  std::vector<Admission> adm = {{0, 0, Strategy::seed}, {1, 50, Strategy::tree}, {2, 90, Strategy::tree}};
  auto e = cumulative_by_exec(adm);
  CHECK(e[Strategy::tree] == Series{{0, 0}, {50, 1}, {90, 2}});
  CHECK(e.count(Strategy::seed) == 0);

  auto svg = svg_line_chart("a<b", "x", "y", {{"tree", {{0, 0}, {1, 1}}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
}
