#pragma once

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

namespace gramfuzz {

/// Environment variable naming the file an external target writes its raw
/// 65,536-byte coverage map to.
inline constexpr const char* kCoverageFileEnv = "GRAMFUZZ_COV_FILE";

/// Largest input the harness will hand to a target.
inline constexpr std::size_t kMaxInputSize = 1u << 20;

/// Thrown inside direct (unisolated) executions to unwind a target.
struct TargetCrash {
  std::string token;
};
struct TargetHang {};

/// What instrumented in-process targets report into. Each hit(block)
/// records the edge (previous block, block) in the map.
class CoverageSink {
 public:
  enum class Mode { direct, forked };

  CoverageSink(std::uint8_t* cells, Mode mode);

  void hit(std::uint32_t block) {
    std::uint8_t& c = cells_[edge_index(prev_, block)];
    if (c != 255) ++c;
    prev_ = block;
    if (recorder_) recorder_->push_back(block);
    if (deadline_ && (++hits_ & 0x3ff) == 0) check_deadline();
  }

  /// Planted-bug entry point: never returns. Direct mode throws TargetCrash;
  /// forked mode stores the token in shared memory and aborts.
  [[noreturn]] void crash(std::string_view token);

  /// Optional trace of every block id hit, in order (tests use this).
  void record_blocks(std::vector<std::uint32_t>* out) { recorder_ = out; }

  void set_deadline(std::chrono::steady_clock::time_point t) { deadline_ = t; }
  void set_crash_buffer(char* buf, std::uint32_t* len, std::size_t cap) {
    crash_buf_ = buf;
    crash_len_ = len;
    crash_cap_ = cap;
  }

 private:
  void check_deadline();

  std::uint8_t* cells_;
  Mode mode_;
  std::uint32_t prev_ = 0;
  std::uint64_t hits_ = 0;
  std::vector<std::uint32_t>* recorder_ = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  char* crash_buf_ = nullptr;
  std::uint32_t* crash_len_ = nullptr;
  std::size_t crash_cap_ = 0;
};

using TargetFn = std::function<void(ByteView, CoverageSink&)>;

enum class Isolation {
  fork_server,  // one process per execution, forked from a helper
  direct,       // called in the fuzzer's own process; planted faults unwind
};

struct TargetSpec {
  enum class Kind { in_process, external_command };
  Kind kind = Kind::in_process;
  std::string name;
  std::chrono::milliseconds timeout{1000};
  std::vector<std::string> command;  // external: argv, "@@" -> input path
  TargetFn function;                 // in_process
  Isolation isolation = Isolation::fork_server;
};

/// Looks up a bundled in-process target ("xml", "minijs", test fixtures).
std::optional<TargetSpec> builtin_target(std::string_view name);
std::vector<std::string> builtin_target_names();

/// Splits a shell-like command string on whitespace, honouring quotes.
std::vector<std::string> split_command(std::string_view cmd);

enum class ExecStatus { ok, crash, hang };
const char* to_string(ExecStatus s);

struct ExecResult {
  ExecStatus status = ExecStatus::ok;
  CoverageMap map;
  std::chrono::microseconds exec_time{0};
  std::optional<std::string> crash_token;
};

/// ExecResult with the map reduced to its nonzero cells.
struct CompactResult {
  ExecStatus status = ExecStatus::ok;
  SparseCoverage cells;
  CoverageSignature signature;
  std::chrono::microseconds exec_time{0};
  std::optional<std::string> crash_token;
};

class ExecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One execution slot: owns its map buffer, scratch files and (for the
/// fork-server isolation) a helper process. Not thread-safe; give each
/// worker its own.
class Executor {
 public:
  explicit Executor(TargetSpec spec);
  ~Executor();
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  ExecResult run(ByteView input);
  CompactResult run_compact(ByteView input);

  const TargetSpec& spec() const { return spec_; }

 private:
  struct Raw {
    ExecStatus status;
    std::chrono::microseconds elapsed;
    std::optional<std::string> token;
  };
  Raw run_raw(ByteView input);
  Raw run_direct(ByteView input);
  Raw run_forked(ByteView input);
  Raw run_external(ByteView input);
  void start_server();
  void stop_server();
  const std::uint8_t* cells() const;

  TargetSpec spec_;
  struct Shared;
  Shared* shared_ = nullptr;
  std::vector<std::uint8_t> local_map_;
  int ctl_fd_ = -1;
  int status_fd_ = -1;
  int server_pid_ = -1;
  std::filesystem::path scratch_;
};

/// One-shot convenience: builds an Executor, runs once.
ExecResult execute(const TargetSpec& t, ByteView input);

}  // namespace gramfuzz
