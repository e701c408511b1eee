#pragma once

// Context-free grammars loaded from the line-oriented grammar file format:
//
//   # comment
//   start program ;                  optional; default is the first rule
//   program   := statement* ;        rule (EBNF groups and * + ? allowed)
//   statement := VAR IDENT SEMI | expr SEMI ;
//   VAR       := /var/ ;             token
//   WS        skip /[ \t\n]+/ ;      trivia token, kept in spans only
//
// Groups and postfix operators in rule bodies are desugared into hidden
// helper rules. Helper nodes are spliced into their parent in parse trees,
// so only named rules ever appear as tree nodes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gramfuzz/token_regex.hpp"

namespace gramfuzz {

class GrammarError : public std::runtime_error {
 public:
  GrammarError(std::size_t line, std::size_t column, const std::string& msg);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct Symbol {
  enum class Kind : std::uint8_t { token, rule };
  Kind kind = Kind::token;
  std::uint32_t index = 0;

  bool is_token() const { return kind == Kind::token; }
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

struct TokenDef {
  std::string name;
  std::string pattern;  // regex source, without slashes
  bool skip = false;
  std::optional<std::string> literal;  // set when the pattern is one string
  regex::Node regex;
};

struct Rule {
  std::string name;
  std::vector<std::vector<Symbol>> alternatives;
  bool hidden = false;  // desugaring helper; transparent in trees
};

class GrammarSpec {
 public:
  const std::string& name() const { return name_; }
  const std::vector<TokenDef>& tokens() const { return tokens_; }
  /// All rules, including hidden helpers (which follow the named rules).
  const std::vector<Rule>& rules() const { return rules_; }
  std::uint32_t start_rule() const { return start_; }

  /// Number of user-named rules. This is the grammar's symbol count.
  std::size_t named_rule_count() const { return named_rules_; }

  std::optional<std::uint32_t> find_token(std::string_view name) const;
  std::optional<std::uint32_t> find_rule(std::string_view name) const;
  std::string_view symbol_name(Symbol s) const;

  /// True for skip tokens whose name marks them as comments
  /// (contains "COMMENT", case-insensitive).
  bool is_comment_token(std::uint32_t token) const;

  const regex::Dfa& lexer() const { return lexer_; }
  bool nullable(std::uint32_t rule) const { return nullable_[rule]; }

 private:
  friend GrammarSpec load_grammar(std::string_view text, std::string name);

  std::string name_;
  std::vector<TokenDef> tokens_;
  std::vector<Rule> rules_;
  std::uint32_t start_ = 0;
  std::size_t named_rules_ = 0;
  regex::Dfa lexer_;
  std::vector<bool> nullable_;
};

/// Parses and validates a grammar. Throws GrammarError with the line and
/// column of the offending construct.
GrammarSpec load_grammar(std::string_view text, std::string name = "grammar");

/// Reads a grammar file; the grammar is named after the file stem.
GrammarSpec load_grammar_file(const std::filesystem::path& path);

}  // namespace gramfuzz
