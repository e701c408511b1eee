#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gramfuzz/bytes.hpp"
#include "gramfuzz/grammar.hpp"
#include "gramfuzz/parse_tree.hpp"

namespace gramfuzz {

/// Seeded mt19937_64 with an explicit unbiased bounded draw, so sequences
/// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  /// Uniform in [0, n); n must be nonzero.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

enum class Strategy : std::uint8_t {
  seed,
  flip1, flip2, flip4, flip8, flip16, flip32,
  arith8, arith16, arith32,
  interest8, interest16, interest32,
  ui, uo, ai, ao,
  havoc, splice, tree,
};
inline constexpr std::size_t kStrategyCount = 20;

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view name);
bool is_flip(Strategy s);  // flip1 .. flip32

inline constexpr std::array<Strategy, 12> kDeterministicStages = {
    Strategy::flip1,     Strategy::flip2,      Strategy::flip4,     Strategy::flip8,
    Strategy::flip16,    Strategy::flip32,     Strategy::arith8,    Strategy::arith16,
    Strategy::arith32,   Strategy::interest8,  Strategy::interest16, Strategy::interest32};

struct MutationBatch {
  Strategy strategy = Strategy::havoc;
  std::vector<Bytes> mutants;
  /// Per-mutant strategy when a batch mixes tags (dictionary stage).
  std::vector<Strategy> tags;
  /// Mutants the strategy produced before any cap was applied.
  std::size_t generated_count = 0;
};

using MutantSink = std::function<void(ByteView mutant)>;

inline constexpr int kArithMax = 35;

struct DeterministicOptions {
  /// Skip mutants an earlier stage already produced for the same bytes
  /// (the usual bit-flip / arithmetic / interesting-value overlap filters).
  /// When false, every non-identity mutant is emitted.
  bool skip_redundant = true;
};

/// Streams one deterministic stage's mutants in offset order.
void for_each_deterministic(ByteView input, Strategy stage, const MutantSink& emit,
                            DeterministicOptions opt = {});
MutationBatch deterministic_stage(ByteView input, Strategy stage,
                                  DeterministicOptions opt = {});

/// count mutants, each a stack of 2^k (k uniform in [1,6]) random edits.
MutationBatch havoc(ByteView input, Rng& rng, std::size_t count);
Bytes havoc_one(ByteView input, Rng& rng);

/// a's prefix up to a split point drawn uniformly from [first, last]
/// differing offset (within the shorter length), followed by b's suffix.
/// nullopt when either input is shorter than 2 bytes or no byte differs.
std::optional<Bytes> splice_inputs(ByteView a, ByteView b, Rng& rng);

struct TokenRun {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenRun&, const TokenRun&) = default;
};

std::vector<TokenRun> locate_token_runs(ByteView input);

struct DictEntry {
  enum class Origin : std::uint8_t { user, automatic };
  std::string name;
  Bytes token;
  Origin origin = Origin::user;
};

inline constexpr std::size_t kMaxTokenSize = 128;

class Dictionary {
 public:
  /// Adds a token unless empty, too long, or already present.
  bool add(Bytes token, DictEntry::Origin origin, std::string name = {});
  const std::vector<DictEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(ByteView token) const;

 private:
  std::vector<DictEntry> entries_;
};

class DictionaryError : public std::runtime_error {
 public:
  DictionaryError(std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Dictionary file: `name="escaped bytes"` per line (name optional),
/// escapes \xNN \\ \" ; blank lines and '#' comments ignored.
Dictionary parse_dictionary(std::string_view text,
                            DictEntry::Origin origin = DictEntry::Origin::user);
Dictionary load_dictionary_file(const std::filesystem::path& path,
                                DictEntry::Origin origin = DictEntry::Origin::user);
std::string escape_token(ByteView token);

/// Grammar literals, then the 64 most frequent alphanumeric runs of length
/// 2..32 in the corpus (ties broken lexicographically), deduplicated.
Dictionary extract_auto_tokens(const std::vector<Bytes>& corpus, const GrammarSpec& g);

/// Appends src's entries to dst, skipping duplicates.
void merge_dictionary(Dictionary& dst, const Dictionary& src);

enum class DictOp : std::uint8_t { insert, overwrite };
Strategy dictionary_strategy(DictOp op, DictEntry::Origin origin);

using DictSink = std::function<void(ByteView mutant, DictOp op, const DictEntry& entry)>;

/// Token-boundary dictionary mutation. Positions are those the run scan
/// visits (each run start, each non-alphanumeric byte) plus the end of the
/// input (insertion only). Per position and token: insert at i, then
/// overwrite [i, j). Identity overwrites are skipped.
void for_each_dictionary_mutant(ByteView input, const Dictionary& d, const DictSink& emit);
MutationBatch dictionary_mutate(ByteView input, const Dictionary& d);

/// Per-byte scheme: insertion at every offset 0..len, overwrite of the
/// token's length at every offset where it fits. Identity overwrites skipped.
void for_each_naive_dictionary_mutant(ByteView input, const Dictionary& d, const DictSink& emit);
MutationBatch naive_dictionary_mutate(ByteView input, const Dictionary& d);

/// Mutant counts of the two schemes, without building the mutants.
std::size_t count_dictionary_mutants(ByteView input, const Dictionary& d);
std::size_t count_naive_dictionary_mutants(ByteView input, const Dictionary& d);

struct TreeMutationLimits {
  std::size_t max_input_bytes = 10000;  // tar/pro size limit
  std::size_t max_subtree_bytes = 200;  // pool entries
  std::size_t max_pool = 10000;
  std::size_t max_mutants = 10000;
  bool same_kind = false;  // only replace with subtrees of the same rule
};

/// Subtree replacement: every subtree of tar is replaced by every pool
/// subtree (tar's own, then pro's), subject to the limits above. When the
/// pool or the product exceeds its cap, a uniform sample without
/// replacement is kept in enumeration order.
MutationBatch tree_mutate(ByteView tar, ByteView pro, const GrammarSpec& g, Rng& rng,
                          const TreeMutationLimits& lim = {});
/// Same, on trees the caller already parsed; pro may be null.
MutationBatch tree_mutate(const ParseTree& tar, const ParseTree* pro, Rng& rng,
                          const TreeMutationLimits& lim = {});

}  // namespace gramfuzz
