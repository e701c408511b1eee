#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gramfuzz/bytes.hpp"
#include "gramfuzz/grammar.hpp"

namespace gramfuzz {

struct Token {
  std::uint32_t kind = 0;  // index into GrammarSpec::tokens()
  Span span;
};

/// Token stream of an input. Skip-class tokens are kept apart so span
/// accounting can see trivia without it reaching the parser.
struct TokenStream {
  std::vector<Token> tokens;
  std::vector<Token> trivia;
};

struct ParseError {
  enum class Kind { tokenize, syntax };
  Kind kind = Kind::syntax;
  std::size_t offset = 0;  // byte offset of the first failure
  std::string message;
};

/// Tokenizes with maximal munch; ties go to the earlier token definition.
/// Returns the ParseError of the first byte no token matches.
std::optional<ParseError> tokenize(const GrammarSpec& g, ByteView input,
                                   TokenStream& out);

/// Concrete syntax tree. Nodes live in a flat arena; node 0 is the root.
/// The root spans the whole source (leading and trailing trivia included);
/// every other node spans its first to its last token. Leaves are tokens.
class ParseTree {
 public:
  struct Node {
    Symbol kind;
    Span span;
    std::uint32_t first_child = 0;
    std::uint32_t child_count = 0;
  };

  ParseTree(const GrammarSpec& g, Bytes source, std::vector<Node> nodes,
            std::vector<std::uint32_t> children);

  const GrammarSpec& grammar() const { return *grammar_; }
  const Bytes& source() const { return source_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  const Node& root() const { return nodes_.front(); }

  std::uint32_t child(std::uint32_t node, std::uint32_t k) const {
    return children_[nodes_[node].first_child + k];
  }
  std::string_view kind_name(std::uint32_t node) const {
    return grammar_->symbol_name(nodes_[node].kind);
  }
  /// Exact source bytes of a node; for leaves this is the lexeme.
  ByteView text(std::uint32_t node) const {
    const Span& s = nodes_[node].span;
    return ByteView(source_).substr(s.start, s.size());
  }
  bool is_leaf(std::uint32_t node) const { return nodes_[node].kind.is_token(); }

  /// Resolves a child-index path from the root.
  std::optional<std::uint32_t> resolve(const std::vector<std::uint32_t>& path) const;

 private:
  const GrammarSpec* grammar_;
  Bytes source_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> children_;
};

struct ParseResult {
  std::optional<ParseTree> tree;
  ParseError error;

  bool ok() const { return tree.has_value(); }
  explicit operator bool() const { return ok(); }
};

/// Earley parse of arbitrary bytes. Ambiguity is resolved by preferring the
/// earliest-listed alternative, then the longest leftmost child.
/// The returned tree refers to `g`, which must outlive it.
ParseResult parse(const GrammarSpec& g, ByteView input);

/// The bytes the tree covers; for an unmodified tree, the parsed input.
Bytes serialize(const ParseTree& t);

struct SubtreeRef {
  std::vector<std::uint32_t> path;
  Span span;
  Symbol kind;
  std::size_t size_bytes = 0;
  std::uint32_t node = 0;  // arena index in the owning tree
  std::uint32_t depth = 0;
};

inline constexpr std::size_t kUnlimited = static_cast<std::size_t>(-1);

/// Pre-order list of every non-root rule node with a nonempty span of at
/// most max_bytes. Token leaves are excluded.
std::vector<SubtreeRef> enumerate_subtrees(const ParseTree& t,
                                           std::size_t max_bytes = kUnlimited);

class SpanError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// source with span deleted. Throws SpanError if the span is out of range.
Bytes excise(ByteView source, Span span);
inline Bytes excise(ByteView source, const SubtreeRef& n) {
  return excise(source, n.span);
}

/// source with span replaced by replacement. Throws SpanError.
Bytes splice(ByteView source, Span at, ByteView replacement);
inline Bytes splice(ByteView source, const SubtreeRef& at, ByteView replacement) {
  return splice(source, at.span, replacement);
}

}  // namespace gramfuzz
