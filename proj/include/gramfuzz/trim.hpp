#pragma once

#include <functional>
#include <optional>
#include <string>

#include "gramfuzz/bytes.hpp"
#include "gramfuzz/coverage.hpp"
#include "gramfuzz/grammar.hpp"

namespace gramfuzz {

/// Runs the target on a candidate and reports its coverage signature.
/// Callers map crashes and hangs to signatures that never equal an ok run's.
using TrimOracle = std::function<CoverageSignature(ByteView)>;

enum class TrimMode { tree, builtin, builtin_fallback };
const char* to_string(TrimMode m);

struct TrimAttempt {
  TrimMode mode;
  std::size_t n = 0;  // chunk divisor for builtin passes, 0 for subtree removals
  Span removed;       // relative to the input as it was at the attempt
  bool accepted = false;
};

struct TrimOptions {
  /// Called for every executed candidate, in order.
  std::function<void(const TrimAttempt&, ByteView candidate, CoverageSignature)> on_attempt;
};

struct TrimOutcome {
  Bytes trimmed;
  std::size_t bytes_removed = 0;
  /// Candidate executions; the baseline run is not counted.
  std::size_t executions_used = 0;
  TrimMode mode = TrimMode::builtin;
  bool still_parses = false;
  /// Set when the oracle threw; trimmed then holds the best result so far
  /// (tree mode) or the original (builtin mode).
  std::optional<std::string> error;
};

inline constexpr std::size_t kTrimMinChunk = 4;
inline constexpr std::size_t kTrimFirstDivisor = 16;
inline constexpr std::size_t kTrimLastDivisor = 1024;

/// Chunked removal for n = 16, 32, ..., 1024 with chunk = len/n recomputed
/// from the current length at each n. Removals shorter than 4 bytes are not
/// attempted. still_parses is left false (no grammar is consulted).
TrimOutcome builtin_trim(ByteView input, const TrimOracle& oracle,
                         CoverageSignature original, const TrimOptions& opt = {});
TrimOutcome builtin_trim(ByteView input, const TrimOracle& oracle);

/// Subtree removal. Unparsable input falls back to builtin_trim. Otherwise
/// subtrees are tried shallowest first, larger spans first within a depth,
/// pre-order among equals; an excision is executed only if the remainder
/// still parses, and accepted iff its signature is unchanged, after which
/// the scan restarts on the re-parsed remainder.
TrimOutcome tree_trim(ByteView input, const GrammarSpec& g, const TrimOracle& oracle,
                      CoverageSignature original, const TrimOptions& opt = {});
TrimOutcome tree_trim(ByteView input, const GrammarSpec& g, const TrimOracle& oracle);

}  // namespace gramfuzz
