#include "gramfuzz/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace gramfuzz {

GrammarError::GrammarError(std::size_t line, std::size_t column,
                           const std::string& msg)
    : std::runtime_error("grammar:" + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

struct Pos {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct Lexeme {
  enum class Kind { ident, define, bar, semi, lparen, rparen, star, plus, opt, regex, end };
  Kind kind;
  std::string text;
  Pos pos;
};

class FileLexer {
 public:
  explicit FileLexer(std::string_view text) : text_(text) {}

  std::vector<Lexeme> run() {
    std::vector<Lexeme> out;
    while (true) {
      skip_space_and_comments();
      Pos at = pos_;
      if (i_ >= text_.size()) {
        out.push_back({Lexeme::Kind::end, "", at});
        return out;
      }
      char c = text_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = i_;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) ||
                text_[i_] == '_'))
          advance();
        out.push_back({Lexeme::Kind::ident, std::string(text_.substr(b, i_ - b)), at});
        continue;
      }
      if (c == '/') {
        advance();
        std::string body;
        while (true) {
          if (i_ >= text_.size() || text_[i_] == '\n')
            throw GrammarError(at.line, at.column, "unterminated /regex/");
          char r = text_[i_];
          if (r == '/') {
            advance();
            break;
          }
          if (r == '\\' && i_ + 1 < text_.size() && text_[i_ + 1] != '\n') {
            body += r;
            advance();
            body += text_[i_];
            advance();
            continue;
          }
          body += r;
          advance();
        }
        out.push_back({Lexeme::Kind::regex, body, at});
        continue;
      }
      if (c == ':' && i_ + 1 < text_.size() && text_[i_ + 1] == '=') {
        advance();
        advance();
        out.push_back({Lexeme::Kind::define, ":=", at});
        continue;
      }
      Lexeme::Kind k;
      switch (c) {
        case '|': k = Lexeme::Kind::bar; break;
        case ';': k = Lexeme::Kind::semi; break;
        case '(': k = Lexeme::Kind::lparen; break;
        case ')': k = Lexeme::Kind::rparen; break;
        case '*': k = Lexeme::Kind::star; break;
        case '+': k = Lexeme::Kind::plus; break;
        case '?': k = Lexeme::Kind::opt; break;
        default:
          throw GrammarError(at.line, at.column,
                             std::string("unexpected character '") + c + "'");
      }
      advance();
      out.push_back({k, std::string(1, c), at});
    }
  }

 private:
  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip_space_and_comments() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t i_ = 0;
  Pos pos_;
};

// Rule bodies before name resolution.
struct Item;
using Alternatives = std::vector<std::vector<Item>>;
struct Item {
  std::variant<std::string, Alternatives> what;  // symbol name or group
  std::vector<char> postfix;                      // '*', '+', '?' in order
  Pos pos;
};

struct RawRule {
  std::string name;
  Alternatives body;
  Pos pos;
};

class FileParser {
 public:
  explicit FileParser(std::vector<Lexeme> lx) : lx_(std::move(lx)) {}

  std::vector<TokenDef> tokens;
  std::vector<Pos> token_pos;
  std::vector<RawRule> rules;
  std::optional<std::pair<std::string, Pos>> start;

  void run() {
    while (cur().kind != Lexeme::Kind::end) statement();
  }

 private:
  const Lexeme& cur() const { return lx_[i_]; }
  const Lexeme& peek(std::size_t k) const {
    return lx_[std::min(i_ + k, lx_.size() - 1)];
  }
  [[noreturn]] void fail(const Lexeme& at, const std::string& msg) const {
    throw GrammarError(at.pos.line, at.pos.column, msg);
  }
  const Lexeme& expect(Lexeme::Kind k, const char* what) {
    if (cur().kind != k) fail(cur(), std::string("expected ") + what);
    return lx_[i_++];
  }

  void statement() {
    const Lexeme& head = expect(Lexeme::Kind::ident, "a rule or token name");
    if (head.text == "start" && cur().kind == Lexeme::Kind::ident &&
        peek(1).kind == Lexeme::Kind::semi) {
      if (start) fail(head, "duplicate start directive");
      start = {cur().text, cur().pos};
      i_ += 2;
      return;
    }
    if (cur().kind == Lexeme::Kind::ident && cur().text == "skip") {
      ++i_;
      const Lexeme& re = expect(Lexeme::Kind::regex, "/regex/ after 'skip'");
      add_token(head, re, true);
      expect(Lexeme::Kind::semi, "';'");
      return;
    }
    expect(Lexeme::Kind::define, "':=' or 'skip'");
    if (cur().kind == Lexeme::Kind::regex) {
      const Lexeme& re = lx_[i_++];
      add_token(head, re, false);
      expect(Lexeme::Kind::semi, "';'");
      return;
    }
    RawRule r{head.text, alternatives(), head.pos};
    expect(Lexeme::Kind::semi, "';'");
    rules.push_back(std::move(r));
  }

  void add_token(const Lexeme& name, const Lexeme& re, bool skip) {
    TokenDef t;
    t.name = name.text;
    t.pattern = re.text;
    t.skip = skip;
    try {
      t.regex = regex::parse(re.text);
    } catch (const regex::RegexError& e) {
      throw GrammarError(re.pos.line, re.pos.column + 1 + e.offset(), e.what());
    }
    auto lit = regex::literal_of(t.regex);
    if (lit && !lit->empty()) t.literal = std::move(lit);
    tokens.push_back(std::move(t));
    token_pos.push_back(name.pos);
  }

  Alternatives alternatives() {
    Alternatives alts;
    alts.push_back(sequence());
    while (cur().kind == Lexeme::Kind::bar) {
      ++i_;
      alts.push_back(sequence());
    }
    return alts;
  }

  std::vector<Item> sequence() {
    std::vector<Item> seq;
    while (true) {
      Item item;
      item.pos = cur().pos;
      if (cur().kind == Lexeme::Kind::ident) {
        item.what = cur().text;
        ++i_;
      } else if (cur().kind == Lexeme::Kind::lparen) {
        ++i_;
        item.what = alternatives();
        expect(Lexeme::Kind::rparen, "')'");
      } else {
        break;
      }
      while (cur().kind == Lexeme::Kind::star || cur().kind == Lexeme::Kind::plus ||
             cur().kind == Lexeme::Kind::opt) {
        item.postfix.push_back(cur().text[0]);
        ++i_;
      }
      seq.push_back(std::move(item));
    }
    return seq;
  }

  std::vector<Lexeme> lx_;
  std::size_t i_ = 0;
};

class Resolver {
 public:
  Resolver(const std::vector<TokenDef>& tokens, std::vector<Rule>& rules,
           const std::map<std::string, Symbol>& names)
      : tokens_(tokens), rules_(rules), names_(names) {}

  std::vector<std::vector<Symbol>> resolve(const Alternatives& alts,
                                           const std::string& owner) {
    std::vector<std::vector<Symbol>> out;
    for (const auto& seq : alts) {
      std::vector<Symbol> syms;
      for (const Item& item : seq) syms.push_back(resolve_item(item, owner));
      out.push_back(std::move(syms));
    }
    return out;
  }

 private:
  Symbol helper(const std::string& owner, std::vector<std::vector<Symbol>> alts) {
    Rule r;
    r.name = owner + "$" + std::to_string(++counter_);
    r.alternatives = std::move(alts);
    r.hidden = true;
    rules_.push_back(std::move(r));
    return {Symbol::Kind::rule, static_cast<std::uint32_t>(rules_.size() - 1)};
  }

  Symbol resolve_item(const Item& item, const std::string& owner) {
    Symbol base;
    if (const auto* name = std::get_if<std::string>(&item.what)) {
      auto it = names_.find(*name);
      if (it == names_.end())
        throw GrammarError(item.pos.line, item.pos.column,
                           "undefined symbol '" + *name + "'");
      base = it->second;
    } else {
      base = helper(owner, resolve(std::get<Alternatives>(item.what), owner));
    }
    for (char op : item.postfix) {
      switch (op) {
        case '*': {
          Symbol self{Symbol::Kind::rule, static_cast<std::uint32_t>(rules_.size())};
          base = helper(owner, {{self, base}, {}});
          break;
        }
        case '+': {
          Symbol self{Symbol::Kind::rule, static_cast<std::uint32_t>(rules_.size())};
          base = helper(owner, {{self, base}, {base}});
          break;
        }
        default:
          base = helper(owner, {{base}, {}});
      }
    }
    return base;
  }

  const std::vector<TokenDef>& tokens_;
  std::vector<Rule>& rules_;
  const std::map<std::string, Symbol>& names_;
  std::size_t counter_ = 0;
};

}  // namespace

std::optional<std::uint32_t> GrammarSpec::find_token(std::string_view name) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i].name == name) return static_cast<std::uint32_t>(i);
  return std::nullopt;
}

std::optional<std::uint32_t> GrammarSpec::find_rule(std::string_view name) const {
  for (std::size_t i = 0; i < named_rules_; ++i)
    if (rules_[i].name == name) return static_cast<std::uint32_t>(i);
  return std::nullopt;
}

std::string_view GrammarSpec::symbol_name(Symbol s) const {
  return s.is_token() ? std::string_view(tokens_[s.index].name)
                      : std::string_view(rules_[s.index].name);
}

bool GrammarSpec::is_comment_token(std::uint32_t token) const {
  const TokenDef& t = tokens_[token];
  if (!t.skip) return false;
  std::string upper;
  for (char c : t.name) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return upper.find("COMMENT") != std::string::npos;
}

GrammarSpec load_grammar(std::string_view text, std::string name) {
  FileParser fp(FileLexer(text).run());
  fp.run();

  GrammarSpec g;
  g.name_ = std::move(name);
  g.tokens_ = std::move(fp.tokens);

  std::map<std::string, Symbol> names;
  for (std::size_t i = 0; i < g.tokens_.size(); ++i) {
    auto [it, fresh] = names.emplace(
        g.tokens_[i].name, Symbol{Symbol::Kind::token, static_cast<std::uint32_t>(i)});
    if (!fresh)
      throw GrammarError(fp.token_pos[i].line, fp.token_pos[i].column,
                         "duplicate definition of '" + g.tokens_[i].name + "'");
  }
  for (std::size_t i = 0; i < fp.rules.size(); ++i) {
    const RawRule& r = fp.rules[i];
    auto [it, fresh] =
        names.emplace(r.name, Symbol{Symbol::Kind::rule, static_cast<std::uint32_t>(i)});
    if (!fresh)
      throw GrammarError(r.pos.line, r.pos.column,
                         "duplicate definition of '" + r.name + "'");
  }
  if (fp.rules.empty()) throw GrammarError(1, 1, "grammar defines no rules");

  g.named_rules_ = fp.rules.size();
  g.rules_.resize(fp.rules.size());
  for (std::size_t i = 0; i < fp.rules.size(); ++i) g.rules_[i].name = fp.rules[i].name;

  Resolver resolver(g.tokens_, g.rules_, names);
  for (std::size_t i = 0; i < fp.rules.size(); ++i) {
    auto alts = resolver.resolve(fp.rules[i].body, fp.rules[i].name);
    g.rules_[i].alternatives = std::move(alts);
  }

  if (fp.start) {
    auto it = names.find(fp.start->first);
    if (it == names.end() || it->second.is_token())
      throw GrammarError(fp.start->second.line, fp.start->second.column,
                         "start symbol '" + fp.start->first + "' is not a rule");
    g.start_ = it->second.index;
  }

  for (std::size_t i = 0; i < g.tokens_.size(); ++i) {
    if (regex::literal_of(g.tokens_[i].regex) == std::string{})
      throw GrammarError(fp.token_pos[i].line, fp.token_pos[i].column,
                         "token '" + g.tokens_[i].name + "' only matches the empty string");
  }
  std::vector<regex::Node> patterns;
  for (const auto& t : g.tokens_) patterns.push_back(t.regex);
  try {
    g.lexer_ = regex::Dfa::build(patterns);
  } catch (const regex::RegexError& e) {
    throw GrammarError(1, 1, e.what());
  }
  for (std::size_t i = 0; i < g.tokens_.size(); ++i) {
    if (!g.lexer_.accepts_nonempty(static_cast<std::int32_t>(i)))
      throw GrammarError(fp.token_pos[i].line, fp.token_pos[i].column,
                         "token '" + g.tokens_[i].name + "' matches no nonempty string");
  }

  g.nullable_.assign(g.rules_.size(), false);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t r = 0; r < g.rules_.size(); ++r) {
      if (g.nullable_[r]) continue;
      for (const auto& alt : g.rules_[r].alternatives) {
        bool all = std::all_of(alt.begin(), alt.end(), [&](Symbol s) {
          return !s.is_token() && g.nullable_[s.index];
        });
        if (all) {
          g.nullable_[r] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return g;
}

GrammarSpec load_grammar_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grammar file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_grammar(ss.str(), path.stem().string());
}

}  // namespace gramfuzz
