#pragma once

// Restricted regular expressions for token definitions, and the combined
// DFA the tokenizer runs.
//
// Supported syntax: literal bytes, `.` (any byte but '\n'), character
// classes `[a-z_]` / `[^...]`, escapes (\n \t \r \f \v \0 \xNN \d \w \s and
// escaped metacharacters), grouping `( )`, alternation `|`, and the postfix
// operators `*`, `+`, `?`.

#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gramfuzz::regex {

using ByteSet = std::bitset<256>;

struct Node {
  enum class Kind { empty, set, concat, alt, star, plus, opt };
  Kind kind = Kind::empty;
  ByteSet bytes;            // kind == set
  std::vector<Node> kids;   // concat/alt: n kids; star/plus/opt: 1 kid
};

class RegexError : public std::runtime_error {
 public:
  RegexError(std::size_t offset, const std::string& what)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses a pattern (without the surrounding slashes). Throws RegexError.
Node parse(std::string_view pattern);

/// If the pattern matches exactly one string, returns it.
std::optional<std::string> literal_of(const Node& node);

/// True if the pattern matches the empty string.
bool matches_empty(const Node& node);

/// Deterministic automaton recognising the union of several patterns.
/// accept(state) is the lowest pattern index accepted in that state, or -1.
class Dfa {
 public:
  static constexpr std::int32_t kDead = -1;

  /// Subset construction over all patterns. Throws RegexError if the
  /// automaton would exceed max_states.
  static Dfa build(const std::vector<Node>& patterns,
                   std::size_t max_states = 60000);

  std::int32_t start() const { return 0; }
  std::int32_t step(std::int32_t state, unsigned char byte) const {
    return next_[static_cast<std::size_t>(state) * num_classes_ +
                 byte_class_[byte]];
  }
  std::int32_t accept(std::int32_t state) const {
    return accept_[static_cast<std::size_t>(state)];
  }
  std::size_t state_count() const { return accept_.size(); }

  struct Match {
    std::int32_t pattern = -1;
    std::size_t length = 0;
  };
  /// Longest nonempty match starting at `from`; ties go to the lowest
  /// pattern index. pattern == -1 when nothing matches.
  Match longest_match(std::string_view input, std::size_t from) const;

  /// Whether pattern `index` accepts at least one nonempty string.
  bool accepts_nonempty(std::int32_t index) const;

 private:
  std::vector<std::uint16_t> byte_class_ = std::vector<std::uint16_t>(256);
  std::size_t num_classes_ = 0;
  std::vector<std::int32_t> next_;
  std::vector<std::int32_t> accept_;
  // Every pattern accepted by each state, for accepts_nonempty.
  std::vector<std::vector<std::int32_t>> all_accepts_;
};

}  // namespace gramfuzz::regex
