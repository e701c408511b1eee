#pragma once

// Random sentence generator for tests. Derivations pick alternatives
// uniformly until max_depth, then take the shallowest one. Tokens are drawn
// from their patterns and separated by whitespace or sampled trivia; only
// results that parse are returned.

#include <optional>
#include <vector>

#include "gramfuzz/bytes.hpp"
#include "gramfuzz/grammar.hpp"
#include "gramfuzz/mutate.hpp"

namespace gramfuzz::testing {

struct GeneratorOptions {
  std::size_t max_depth = 9;
  std::size_t max_tokens = 300;
  std::uint32_t trivia_percent = 10;  // chance of a comment instead of a space
};

class InputGenerator {
 public:
  InputGenerator(const GrammarSpec& g, std::uint64_t seed, GeneratorOptions opt = {});

  /// One derivation; nullopt if it got too long or does not parse.
  std::optional<Bytes> attempt();

  /// Up to count parseable inputs, giving up after max_attempts tries.
  std::vector<Bytes> generate(std::size_t count, std::size_t max_attempts);

  /// A lexeme that lexes back as exactly token `tok`, if one was found.
  std::optional<Bytes> sample_token(std::uint32_t tok);

 private:
  bool expand(std::uint32_t rule, std::size_t depth, std::vector<std::uint32_t>& out);
  Bytes sample_regex(const regex::Node& n);

  const GrammarSpec& g_;
  Rng rng_;
  GeneratorOptions opt_;
  std::vector<std::size_t> height_;
  std::vector<std::size_t> alt_height_first_;  // index of a shallowest alternative
};

}  // namespace gramfuzz::testing
