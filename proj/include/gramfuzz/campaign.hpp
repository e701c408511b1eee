#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gramfuzz/bytes.hpp"
#include "gramfuzz/coverage.hpp"
#include "gramfuzz/grammar.hpp"
#include "gramfuzz/harness.hpp"
#include "gramfuzz/mutate.hpp"

namespace gramfuzz {

class CampaignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs batches of inputs on one or more executors. run_serial is the
/// reference; run_parallel spreads a batch over the executors with OpenMP
/// and returns results in input order.
class BatchRunner {
 public:
  BatchRunner(const TargetSpec& spec, unsigned workers);

  unsigned workers() const { return static_cast<unsigned>(slots_.size()); }
  Executor& primary() { return *slots_.front(); }

  std::vector<CompactResult> run_serial(const std::vector<Bytes>& inputs);
  std::vector<CompactResult> run_parallel(const std::vector<Bytes>& inputs);
  /// run_parallel with more than one worker, run_serial otherwise.
  std::vector<CompactResult> run(const std::vector<Bytes>& inputs);

  /// Executions that raised ExecError; they are returned as empty ok results.
  std::uint64_t exec_errors() const { return exec_errors_; }
  const std::string& last_error() const { return last_error_; }

 private:
  CompactResult guarded(Executor& ex, ByteView input);

  std::vector<std::unique_ptr<Executor>> slots_;
  std::uint64_t exec_errors_ = 0;
  std::string last_error_;
};

struct DistillResult {
  std::vector<std::size_t> kept;         // indices into the seed list, ascending
  std::vector<CompactResult> results;    // one per seed, in seed order
  std::vector<std::size_t> crashed;      // seeds that crashed or hung
};

/// Greedy set cover over edge sets: identical seeds collapse to the first,
/// crashing and hanging seeds are dropped, then the seed adding the most
/// uncovered edges is taken repeatedly (ties: smaller, then earlier).
/// Throws CampaignError when the list is empty or every seed fails.
DistillResult distill_corpus(const std::vector<Bytes>& seeds, BatchRunner& runner);
std::vector<Bytes> distill_corpus(const std::vector<Bytes>& seeds, const TargetSpec& target);

/// Removes comment trivia. A single space is left where the comment
/// separated two non-space bytes. Unparsable input, or input that would
/// not reparse after stripping, is returned unchanged.
Bytes strip_comments(ByteView input, const GrammarSpec& g);

struct QueueEntry {
  std::uint64_t id = 0;
  Bytes data;
  CoverageSignature signature;
  std::optional<std::uint64_t> parent;
  Strategy strategy = Strategy::seed;
  bool parses = false;
  bool trimmed = false;
  bool det_done = false;
  std::chrono::microseconds exec_time{0};
  std::uint64_t found_at_exec = 0;
};

struct StrategyStats {
  std::uint64_t generated = 0;
  std::uint64_t interesting = 0;
  std::uint64_t applications = 0;
  std::chrono::nanoseconds parse_time{0};
  std::chrono::nanoseconds mutate_time{0};
  std::chrono::nanoseconds exec_time{0};
};

using StatsTable = std::array<StrategyStats, kStrategyCount>;

enum class DictionaryMode { enhanced, naive, off };
const char* to_string(DictionaryMode m);

struct CampaignConfig {
  std::filesystem::path grammar_path;
  TargetSpec target;
  std::vector<std::filesystem::path> seed_dirs;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> dict_path;
  std::uint64_t rng_seed = 0;
  unsigned workers = 1;
  std::size_t havoc_budget = 256;
  std::size_t splice_rounds = 32;

  std::optional<std::uint64_t> cycles;
  std::optional<double> minutes;
  std::optional<std::uint64_t> max_execs;

  bool tree_mutation = true;
  bool tree_same_kind = false;
  bool grammar_trim = true;
  DictionaryMode dictionary = DictionaryMode::enhanced;
  bool auto_dictionary = true;
  bool deterministic = true;
  bool skip_redundant = true;
  bool distill = true;
  bool strip_seed_comments = true;
  /// Keep wall-clock columns of stats.csv at zero so equal runs produce
  /// equal files; measured times always go to timing.csv.
  bool deterministic_stats = true;
};

struct CrashRecord {
  std::string key;  // crash token, or "sig-<hex>" of the map
  ExecStatus status = ExecStatus::crash;
  std::uint64_t found_at_exec = 0;
  Strategy strategy = Strategy::seed;
  std::uint64_t count = 0;  // times triggered
  std::filesystem::path file;
};

struct CampaignStatus {
  std::uint64_t cycle = 0;
  std::uint64_t execs = 0;
  std::size_t queue_size = 0;
  std::size_t edges = 0;
  std::size_t crashes = 0;
  std::size_t hangs = 0;
  std::chrono::steady_clock::duration elapsed{};
};

struct CampaignHooks {
  std::function<void(const CampaignStatus&)> on_status;
  std::chrono::milliseconds status_interval{5000};
  /// Called after every admission with the admitting execution's result.
  std::function<void(const QueueEntry&, const CompactResult&)> on_admit;
};

struct CampaignReport {
  std::uint64_t total_execs = 0;
  std::uint64_t seed_execs = 0;
  std::uint64_t trim_execs = 0;
  std::uint64_t cycles_completed = 0;
  std::size_t edges = 0;
  std::vector<QueueEntry> queue;
  std::vector<CrashRecord> crashes;
  std::vector<CrashRecord> hangs;
  StatsTable stats{};
  std::vector<std::uint64_t> admitted_hashes;  // fnv1a64 of each entry's data at admission
  std::chrono::steady_clock::duration elapsed{};
  bool stopped_by_limit = false;
};

std::vector<Bytes> load_seed_dirs(const std::vector<std::filesystem::path>& dirs);

CampaignReport run_campaign(const CampaignConfig& cfg, const CampaignHooks& hooks = {});

/// Asks a running campaign to stop at its next batch boundary
/// (async-signal-safe). Cleared when the next campaign starts.
void request_campaign_stop();

/// Manifest written to out/manifest.json; enough to rerun the campaign.
std::string manifest_json(const CampaignConfig& cfg);
CampaignConfig config_from_manifest(const std::filesystem::path& manifest);

/// Reads out/admissions.csv back as the hash sequence.
std::vector<std::uint64_t> read_admitted_hashes(const std::filesystem::path& out_dir);

inline constexpr const char* kManifestVersion = "gramfuzz-manifest-1";

}  // namespace gramfuzz
