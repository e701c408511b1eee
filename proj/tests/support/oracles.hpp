#pragma once

// Slow, obviously-correct reference implementations used as test oracles.

#include <filesystem>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gramfuzz/coverage.hpp"
#include "gramfuzz/mutate.hpp"
#include "gramfuzz/parse_tree.hpp"

namespace gramfuzz::testing {

inline std::filesystem::path source_dir() { return GRAMFUZZ_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) {
  return source_dir() / "fixtures" / rel;
}
inline std::filesystem::path grammar_file(const std::string& name) {
  return source_dir() / "grammars" / name;
}

Bytes read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, ByteView data);
/// Regular files of a directory in name order.
std::vector<std::filesystem::path> list_dir(const std::filesystem::path& dir);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Coverage ------------------------------------------------------------------

/// Bucket class by explicit table lookup.
int bucket_class_table(int count);

/// True iff every cell of a and b falls in the same bucket class.
bool bucketized_equal(const CoverageMap& a, const CoverageMap& b);

/// Novelty decided from a set of (edge, class) pairs seen so far.
class BruteCoverage {
 public:
  Novelty classify(const CoverageMap& m);

 private:
  std::set<std::size_t> edges_;
  std::set<std::pair<std::size_t, int>> classes_;
};

// Grammar -------------------------------------------------------------------

/// Rule nodes below the root with a nonempty span, by recursion.
std::size_t count_subtrees_recursive(const ParseTree& t, std::uint32_t node = 0,
                                     bool is_root = true, std::size_t max_bytes = kUnlimited);

// Mutation ------------------------------------------------------------------

/// Runs by checking every byte and its neighbours.
std::vector<std::pair<std::size_t, std::size_t>> brute_token_runs(ByteView in);

struct DictMutant {
  Bytes data;
  DictOp op;
  Bytes token;
  bool operator<(const DictMutant& o) const {
    return std::tie(data, op, token) < std::tie(o.data, o.op, o.token);
  }
  bool operator==(const DictMutant& o) const {
    return data == o.data && op == o.op && token == o.token;
  }
};

/// The token-boundary loop transcribed as written (curr fixed, j scans
/// while curr and next are alphanumeric), plus an insertion at the end.
/// Identity overwrites are dropped.
std::vector<DictMutant> boundary_dictionary_oracle(ByteView in, const std::vector<Bytes>& tokens);

/// Per-byte scheme: insert at 0..len, same-length overwrite where it fits.
std::vector<DictMutant> per_byte_dictionary_oracle(ByteView in, const std::vector<Bytes>& tokens);

/// Every tar-subtree x pool-subtree replacement, no caps, no sampling.
std::vector<Bytes> tree_mutants_oracle(const ParseTree& tar, const ParseTree* pro,
                                       std::size_t max_subtree_bytes = kUnlimited);

}  // namespace gramfuzz::testing
