#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gramfuzz/mutate.hpp"

namespace gramfuzz {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StatsRow {
  std::uint64_t cycle = 0;
  Strategy strategy = Strategy::havoc;
  std::uint64_t generated = 0;
  std::uint64_t interesting = 0;
  double parse_ms = 0, mutate_ms = 0, exec_ms = 0;
};

/// Parses out/stats.csv. Throws ReportError when missing or malformed.
std::vector<StatsRow> read_stats_csv(const std::filesystem::path& file);

struct Admission {
  std::uint64_t id = 0;
  std::uint64_t exec = 0;
  Strategy strategy = Strategy::seed;
};

std::vector<Admission> read_admissions_csv(const std::filesystem::path& file);

using Series = std::vector<std::pair<double, double>>;

/// Per-strategy running totals of interesting inputs, one point per cycle.
std::map<Strategy, Series> cumulative_by_cycle(const std::vector<StatsRow>& rows);
/// Per-strategy running totals of admissions against the execution count.
std::map<Strategy, Series> cumulative_by_exec(const std::vector<Admission>& adm);

/// Minimal SVG line chart; series are drawn in map order.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<std::pair<std::string, Series>>& series);

struct ReportSummary {
  std::vector<std::filesystem::path> written;
  std::uint64_t dict_enhanced = 0;
  std::uint64_t dict_naive = 0;
};

/// Reads a campaign output directory and writes cumulative.csv,
/// cumulative_exec.csv, ratio.csv, dictionary.csv, phases.csv and, when
/// there is anything to draw, SVG plots into report_dir.
ReportSummary write_report(const std::filesystem::path& out_dir,
                           const std::filesystem::path& report_dir);

}  // namespace gramfuzz
