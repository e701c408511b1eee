// Mini-JS engine: lexer and recursive-descent parser, scope checker, and a
// tree-walking evaluator. The language matches grammars/minijs.g.

#include <algorithm>
#include <bitset>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "gramfuzz/targets.hpp"

namespace gramfuzz::targets {

#define GRAMFUZZ_MINIJS_BLOCKS(X)                                                     \
  X(entry, parse) X(empty_input, parse) X(lex_ws, parse) X(lex_line_comment, parse)  \
  X(lex_block_comment, parse) X(lex_ident, parse) X(lex_keyword, parse)              \
  X(lex_number, parse) X(lex_hex, parse) X(lex_fraction, parse)                      \
  X(lex_exponent, parse) X(lex_string_dq, parse) X(lex_string_sq, parse)             \
  X(lex_escape, parse) X(lex_regex, parse) X(lex_regex_flags, parse)                 \
  X(lex_op1, parse) X(lex_op2, parse) X(lex_punct, parse) X(lex_error, parse)        \
  X(p_program, parse) X(p_var, parse) X(p_var_init, parse)                           \
  X(p_function_decl, parse) X(p_params, parse) X(p_if, parse) X(p_else, parse)       \
  X(p_while, parse) X(p_for, parse) X(p_for_init_var, parse)                         \
  X(p_for_init_expr, parse) X(p_for_cond, parse) X(p_for_update, parse)              \
  X(p_return, parse) X(p_return_value, parse) X(p_break, parse)                      \
  X(p_continue, parse) X(p_try, parse) X(p_throw, parse) X(p_block, parse)           \
  X(p_expr_stmt, parse) X(p_empty_stmt, parse) X(p_binary, parse)                    \
  X(p_assign, parse) X(p_unary, parse) X(p_member, parse) X(p_index, parse)          \
  X(p_call, parse) X(p_args, parse) X(p_number, parse) X(p_string, parse)            \
  X(p_regex, parse) X(p_ident, parse) X(p_literal, parse) X(p_paren, parse)          \
  X(p_array, parse) X(p_function_expr, parse) X(p_error, parse)                      \
  X(p_too_deep, parse) X(p_ok, parse)                                                \
  X(c_entry, check) X(c_hoist_var, check) X(c_hoist_function, check)                 \
  X(c_scope_function, check) X(c_scope_catch, check) X(c_ident_local, check)         \
  X(c_ident_outer, check) X(c_ident_builtin, check) X(c_undeclared, check)           \
  X(c_assign_ident, check) X(c_assign_member, check) X(c_assign_index, check)        \
  X(c_assign_bad, check) X(c_assign_builtin, check) X(c_dup_param, check)            \
  X(c_break_ok, check) X(c_break_bad, check) X(c_continue_ok, check)                 \
  X(c_continue_bad, check) X(c_return_ok, check) X(c_return_bad, check)              \
  X(c_loop, check) X(c_call, check) X(c_member, check) X(c_ok, check)                \
  X(e_entry, eval) X(e_var, eval) X(e_assign, eval) X(e_compound_assign, eval)       \
  X(e_if_true, eval) X(e_if_false, eval) X(e_while_iter, eval)                       \
  X(e_for_iter, eval) X(e_break, eval) X(e_continue, eval) X(e_return, eval)         \
  X(e_throw, eval) X(e_catch, eval) X(e_uncaught, eval) X(e_call_closure, eval)      \
  X(e_call_builtin, eval) X(e_call_method, eval) X(e_call_non_function, eval)        \
  X(e_recursion_limit, eval) X(e_step_limit, eval) X(e_add_number, eval)             \
  X(e_add_string, eval) X(e_arith, eval) X(e_div_zero, eval) X(e_nan, eval)          \
  X(e_infinity, eval) X(e_compare_number, eval) X(e_compare_string, eval)            \
  X(e_equality, eval) X(e_logical, eval) X(e_not, eval) X(e_neg, eval)               \
  X(e_typeof, eval) X(e_array_literal, eval) X(e_index_get, eval)                    \
  X(e_index_set, eval) X(e_index_out_of_range, eval) X(e_array_grow, eval)           \
  X(e_array_length_set, eval) X(e_member_of_nothing, eval)                           \
  X(e_property_missing, eval) X(e_str_length, eval) X(e_str_char_at, eval)           \
  X(e_str_index_of, eval) X(e_str_substring, eval) X(e_str_slice, eval)              \
  X(e_str_case, eval) X(e_str_trim, eval) X(e_str_concat, eval)                      \
  X(e_str_repeat, eval) X(e_str_split, eval) X(e_str_replace_str, eval)              \
  X(e_str_replace_regex, eval) X(e_str_replace_global, eval) X(e_str_match, eval)    \
  X(e_str_match_null, eval) X(e_str_search, eval) X(e_arr_push, eval)                \
  X(e_arr_pop, eval) X(e_arr_join, eval) X(e_arr_index_of, eval)                     \
  X(e_arr_slice, eval) X(e_arr_reverse, eval) X(e_num_to_string, eval)               \
  X(e_num_to_fixed, eval) X(e_range_error, eval) X(e_math, eval)                     \
  X(e_parse_int, eval) X(e_parse_float, eval) X(e_is_nan, eval)                      \
  X(e_string_ctor, eval) X(e_number_ctor, eval) X(e_print, eval)                     \
  X(e_regex_compile, eval) X(e_regex_syntax_error, eval) X(e_regex_match, eval)      \
  X(e_regex_nomatch, eval) X(e_regex_global, eval) X(e_regex_icase, eval)            \
  X(e_regex_word_boundary, eval) X(e_regex_class, eval) X(e_regex_budget, eval)      \
  X(e_regex_test, eval) X(e_regex_exec, eval) X(e_regexp_ctor, eval)                 \
  X(e_regexp_input_get, eval) X(e_regexp_input_set, eval)                            \
  X(e_regexp_last_match, eval) X(e_regexp_left_context, eval)                        \
  X(e_regexp_right_context, eval) X(e_regexp_right_context_empty, eval)              \
  X(e_readonly_set, eval) X(e_ok, eval)

namespace {

enum class JB : std::uint16_t {
#define GRAMFUZZ_ENUM(name, stage) name,
  GRAMFUZZ_MINIJS_BLOCKS(GRAMFUZZ_ENUM)
#undef GRAMFUZZ_ENUM
};

}  // namespace

const std::vector<Block>& minijs_blocks() {
  static const std::vector<Block> blocks = make_inventory({
#define GRAMFUZZ_LABEL(name, stage) {"minijs." #name, Stage::stage},
      GRAMFUZZ_MINIJS_BLOCKS(GRAMFUZZ_LABEL)
#undef GRAMFUZZ_LABEL
  });
  return blocks;
}

namespace {

thread_local std::string g_output;

struct Stop {};

class Probe {
 public:
  explicit Probe(CoverageSink& cov) : cov_(cov), blocks_(minijs_blocks()) {}
  void at(JB b) { cov_.hit(blocks_[static_cast<std::size_t>(b)].id); }
  [[noreturn]] void fail(JB b) {
    at(b);
    throw Stop{};
  }
  CoverageSink& sink() { return cov_; }

 private:
  CoverageSink& cov_;
  const std::vector<Block>& blocks_;
};

// ---------------------------------------------------------------- lexer

enum class T : std::uint8_t {
  end, ident, number, string, regex,
  kw_var, kw_function, kw_if, kw_else, kw_while, kw_for, kw_return, kw_break,
  kw_continue, kw_try, kw_catch, kw_throw, kw_true, kw_false, kw_null,
  kw_undefined, kw_typeof,
  plus_assign, minus_assign, eq, ne, le, ge, and_, or_, assign, lt, gt, plus,
  minus, star, slash, percent, not_, dot, comma, semi, lparen, rparen, lbrace,
  rbrace, lbrack, rbrack,
};

struct Tok {
  T type;
  std::string text;
};

const std::unordered_map<std::string_view, T>& keywords() {
  static const std::unordered_map<std::string_view, T> k = {
      {"var", T::kw_var},         {"function", T::kw_function},
      {"if", T::kw_if},           {"else", T::kw_else},
      {"while", T::kw_while},     {"for", T::kw_for},
      {"return", T::kw_return},   {"break", T::kw_break},
      {"continue", T::kw_continue}, {"try", T::kw_try},
      {"catch", T::kw_catch},     {"throw", T::kw_throw},
      {"true", T::kw_true},       {"false", T::kw_false},
      {"null", T::kw_null},       {"undefined", T::kw_undefined},
      {"typeof", T::kw_typeof}};
  return k;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
 public:
  Lexer(ByteView in, Probe& p) : in_(in), p_(p) {}

  std::vector<Tok> run() {
    std::vector<Tok> out;
    while (i_ < in_.size()) {
      char c = in_[i_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        p_.at(JB::lex_ws);
        while (i_ < in_.size() && (in_[i_] == ' ' || in_[i_] == '\t' || in_[i_] == '\r' ||
                                   in_[i_] == '\n'))
          ++i_;
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        p_.at(JB::lex_line_comment);
        while (i_ < in_.size() && in_[i_] != '\n') ++i_;
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        std::size_t e = in_.find("*/", i_ + 2);
        if (e != ByteView::npos) {
          p_.at(JB::lex_block_comment);
          i_ = e + 2;
          continue;
        }
      }
      if (c == '/') {
        if (std::size_t n = regex_length(); n > 0) {
          p_.at(JB::lex_regex);
          out.push_back({T::regex, std::string(in_.substr(i_, n))});
          i_ += n;
          continue;
        }
      }
      if (is_ident_start(c)) {
        std::size_t b = i_;
        while (i_ < in_.size() && is_ident_char(in_[i_])) ++i_;
        std::string_view w = in_.substr(b, i_ - b);
        auto it = keywords().find(w);
        if (it != keywords().end()) {
          p_.at(JB::lex_keyword);
          out.push_back({it->second, std::string(w)});
        } else {
          p_.at(JB::lex_ident);
          out.push_back({T::ident, std::string(w)});
        }
        continue;
      }
      if (is_digit(c)) {
        out.push_back({T::number, number()});
        continue;
      }
      if (c == '"' || c == '\'') {
        out.push_back({T::string, string_literal()});
        continue;
      }
      out.push_back(op());
    }
    out.push_back({T::end, ""});
    return out;
  }

 private:
  char peek(std::size_t k) const { return i_ + k < in_.size() ? in_[i_ + k] : '\0'; }

  std::size_t regex_length() const {
    std::size_t j = i_ + 1;
    bool first = true;
    while (true) {
      if (j >= in_.size()) return 0;
      char c = in_[j];
      if (c == '\\') {
        if (j + 1 >= in_.size() || is_space(in_[j + 1])) return 0;
        j += 2;
      } else if (c == '/') {
        if (first) return 0;
        break;
      } else if (is_space(c) || (first && c == '*')) {
        return 0;
      } else {
        ++j;
      }
      first = false;
    }
    ++j;
    while (j < in_.size() && std::strchr("gimsuy", in_[j]) && in_[j] != '\0') ++j;
    return j - i_;
  }

  std::string number() {
    std::size_t b = i_;
    if (in_[i_] == '0' && (peek(1) == 'x' || peek(1) == 'X') &&
        std::isxdigit(static_cast<unsigned char>(peek(2)))) {
      p_.at(JB::lex_hex);
      i_ += 2;
      while (i_ < in_.size() && std::isxdigit(static_cast<unsigned char>(in_[i_]))) ++i_;
      return std::string(in_.substr(b, i_ - b));
    }
    p_.at(JB::lex_number);
    while (i_ < in_.size() && is_digit(in_[i_])) ++i_;
    if (peek(0) == '.' && is_digit(peek(1))) {
      p_.at(JB::lex_fraction);
      ++i_;
      while (i_ < in_.size() && is_digit(in_[i_])) ++i_;
    }
    if (peek(0) == 'e' || peek(0) == 'E') {
      std::size_t k = 1;
      if (peek(1) == '+' || peek(1) == '-') k = 2;
      if (is_digit(peek(k))) {
        p_.at(JB::lex_exponent);
        i_ += k;
        while (i_ < in_.size() && is_digit(in_[i_])) ++i_;
      }
    }
    return std::string(in_.substr(b, i_ - b));
  }

  std::string string_literal() {
    char q = in_[i_];
    std::size_t j = i_ + 1;
    std::string value;
    while (true) {
      if (j >= in_.size() || in_[j] == '\n') p_.fail(JB::lex_error);
      char c = in_[j];
      if (c == q) break;
      if (c == '\\') {
        if (j + 1 >= in_.size() || in_[j + 1] == '\n') p_.fail(JB::lex_error);
        p_.at(JB::lex_escape);
        char e = in_[j + 1];
        value += e == 'n' ? '\n' : e == 't' ? '\t' : e == '0' ? '\0' : e;
        j += 2;
        continue;
      }
      value += c;
      ++j;
    }
    p_.at(q == '"' ? JB::lex_string_dq : JB::lex_string_sq);
    i_ = j + 1;
    return value;
  }

  Tok op() {
    static const std::pair<std::string_view, T> two[] = {
        {"+=", T::plus_assign}, {"-=", T::minus_assign}, {"==", T::eq},
        {"!=", T::ne},          {"<=", T::le},           {">=", T::ge},
        {"&&", T::and_},        {"||", T::or_}};
    for (auto [s, t] : two)
      if (in_.substr(i_).starts_with(s)) {
        p_.at(JB::lex_op2);
        i_ += 2;
        return {t, std::string(s)};
      }
    static const std::pair<char, T> one[] = {
        {'=', T::assign}, {'<', T::lt},      {'>', T::gt},     {'+', T::plus},
        {'-', T::minus},  {'*', T::star},    {'/', T::slash},  {'%', T::percent},
        {'!', T::not_},   {'.', T::dot},     {',', T::comma},  {';', T::semi},
        {'(', T::lparen}, {')', T::rparen},  {'{', T::lbrace}, {'}', T::rbrace},
        {'[', T::lbrack}, {']', T::rbrack}};
    for (auto [c, t] : one)
      if (in_[i_] == c) {
        p_.at(std::strchr("(){}[];,.", c) ? JB::lex_punct : JB::lex_op1);
        ++i_;
        return {t, std::string(1, c)};
      }
    p_.fail(JB::lex_error);
  }

  ByteView in_;
  std::size_t i_ = 0;
  Probe& p_;
};

// ---------------------------------------------------------------- AST

enum class N : std::uint8_t {
  num, str, regex, ident, true_, false_, null_, undef, array, func, unary, binary,
  assign, member, index, call,
  var, func_decl, if_, while_, for_, return_, break_, continue_, try_, throw_, block,
  expr_stmt, empty,
};

struct Node {
  N kind;
  T op = T::end;
  std::string str;   // identifier, member name, literal text, regex source
  std::string str2;  // regex flags, catch parameter
  double num = 0;
  std::vector<std::string> params;
  std::vector<Node*> kids;
};

class Parser {
 public:
  Parser(std::vector<Tok> toks, Probe& p, std::deque<Node>& arena)
      : t_(std::move(toks)), p_(p), arena_(arena) {}

  Node* program() {
    p_.at(JB::p_program);
    Node* n = make(N::block);
    while (cur() != T::end) n->kids.push_back(statement());
    p_.at(JB::p_ok);
    return n;
  }

 private:
  T cur() const { return t_[k_].type; }
  T ahead(std::size_t d) const { return t_[std::min(k_ + d, t_.size() - 1)].type; }
  const Tok& take() { return t_[k_ < t_.size() - 1 ? k_++ : k_]; }
  void expect(T t) {
    if (cur() != t) p_.fail(JB::p_error);
    take();
  }
  Node* make(N k) {
    arena_.emplace_back();
    arena_.back().kind = k;
    return &arena_.back();
  }

  struct Depth {
    Parser& p;
    explicit Depth(Parser& pp) : p(pp) {
      if (++p.depth_ > 150) p.p_.fail(JB::p_too_deep);
    }
    ~Depth() { --p.depth_; }
  };

  Node* block() {
    Depth d(*this);
    p_.at(JB::p_block);
    expect(T::lbrace);
    Node* n = make(N::block);
    while (cur() != T::rbrace) {
      if (cur() == T::end) p_.fail(JB::p_error);
      n->kids.push_back(statement());
    }
    take();
    return n;
  }

  std::vector<std::string> params() {
    std::vector<std::string> out;
    if (cur() != T::ident) return out;
    p_.at(JB::p_params);
    out.push_back(take().text);
    while (cur() == T::comma) {
      take();
      if (cur() != T::ident) p_.fail(JB::p_error);
      out.push_back(take().text);
    }
    return out;
  }

  Node* statement() {
    Depth d(*this);
    switch (cur()) {
      case T::kw_var: {
        p_.at(JB::p_var);
        take();
        if (cur() != T::ident) p_.fail(JB::p_error);
        Node* n = make(N::var);
        n->str = take().text;
        if (cur() == T::assign) {
          p_.at(JB::p_var_init);
          take();
          n->kids.push_back(expr());
        }
        expect(T::semi);
        return n;
      }
      case T::kw_function:
        if (ahead(1) == T::ident) {
          p_.at(JB::p_function_decl);
          take();
          Node* n = make(N::func_decl);
          n->str = take().text;
          expect(T::lparen);
          n->params = params();
          expect(T::rparen);
          n->kids.push_back(block());
          return n;
        }
        break;
      case T::kw_if: {
        p_.at(JB::p_if);
        take();
        Node* n = make(N::if_);
        expect(T::lparen);
        n->kids.push_back(expr());
        expect(T::rparen);
        n->kids.push_back(statement());
        if (cur() == T::kw_else) {
          p_.at(JB::p_else);
          take();
          n->kids.push_back(statement());
        }
        return n;
      }
      case T::kw_while: {
        p_.at(JB::p_while);
        take();
        Node* n = make(N::while_);
        expect(T::lparen);
        n->kids.push_back(expr());
        expect(T::rparen);
        n->kids.push_back(statement());
        return n;
      }
      case T::kw_for: {
        p_.at(JB::p_for);
        take();
        Node* n = make(N::for_);
        expect(T::lparen);
        Node* init = nullptr;
        if (cur() == T::kw_var) {
          p_.at(JB::p_for_init_var);
          take();
          if (cur() != T::ident) p_.fail(JB::p_error);
          init = make(N::var);
          init->str = take().text;
          expect(T::assign);
          init->kids.push_back(expr());
        } else if (cur() != T::semi) {
          p_.at(JB::p_for_init_expr);
          init = make(N::expr_stmt);
          init->kids.push_back(expr());
        }
        expect(T::semi);
        Node* cond = nullptr;
        if (cur() != T::semi) {
          p_.at(JB::p_for_cond);
          cond = expr();
        }
        expect(T::semi);
        Node* update = nullptr;
        if (cur() != T::rparen) {
          p_.at(JB::p_for_update);
          update = expr();
        }
        expect(T::rparen);
        n->kids = {init, cond, update, statement()};
        return n;
      }
      case T::kw_return: {
        p_.at(JB::p_return);
        take();
        Node* n = make(N::return_);
        if (cur() != T::semi) {
          p_.at(JB::p_return_value);
          n->kids.push_back(expr());
        }
        expect(T::semi);
        return n;
      }
      case T::kw_break:
        p_.at(JB::p_break);
        take();
        expect(T::semi);
        return make(N::break_);
      case T::kw_continue:
        p_.at(JB::p_continue);
        take();
        expect(T::semi);
        return make(N::continue_);
      case T::kw_try: {
        p_.at(JB::p_try);
        take();
        Node* n = make(N::try_);
        n->kids.push_back(block());
        expect(T::kw_catch);
        expect(T::lparen);
        if (cur() != T::ident) p_.fail(JB::p_error);
        n->str2 = take().text;
        expect(T::rparen);
        n->kids.push_back(block());
        return n;
      }
      case T::kw_throw: {
        p_.at(JB::p_throw);
        take();
        Node* n = make(N::throw_);
        n->kids.push_back(expr());
        expect(T::semi);
        return n;
      }
      case T::lbrace:
        return block();
      case T::semi:
        p_.at(JB::p_empty_stmt);
        take();
        return make(N::empty);
      default:
        break;
    }
    p_.at(JB::p_expr_stmt);
    Node* n = make(N::expr_stmt);
    n->kids.push_back(expr());
    expect(T::semi);
    return n;
  }

  static int precedence(T t) {
    switch (t) {
      case T::assign:
      case T::plus_assign:
      case T::minus_assign: return 1;
      case T::or_: return 2;
      case T::and_: return 3;
      case T::eq:
      case T::ne: return 4;
      case T::lt:
      case T::gt:
      case T::le:
      case T::ge: return 5;
      case T::plus:
      case T::minus: return 6;
      case T::star:
      case T::slash:
      case T::percent: return 7;
      default: return 0;
    }
  }

  Node* expr(int min_prec = 1) {
    Depth d(*this);
    Node* lhs = unary();
    while (true) {
      T op = cur();
      int prec = precedence(op);
      if (prec == 0 || prec < min_prec) return lhs;
      take();
      bool is_assign = prec == 1;
      Node* rhs = expr(is_assign ? prec : prec + 1);
      p_.at(is_assign ? JB::p_assign : JB::p_binary);
      Node* n = make(is_assign ? N::assign : N::binary);
      n->op = op;
      n->kids = {lhs, rhs};
      lhs = n;
    }
  }

  Node* unary() {
    Depth d(*this);
    if (cur() == T::not_ || cur() == T::minus || cur() == T::kw_typeof) {
      p_.at(JB::p_unary);
      Node* n = make(N::unary);
      n->op = take().type;
      n->kids.push_back(unary());
      return n;
    }
    return postfix(primary());
  }

  Node* postfix(Node* e) {
    while (true) {
      if (cur() == T::dot) {
        p_.at(JB::p_member);
        take();
        if (cur() != T::ident) p_.fail(JB::p_error);
        Node* n = make(N::member);
        n->str = take().text;
        n->kids.push_back(e);
        e = n;
      } else if (cur() == T::lbrack) {
        p_.at(JB::p_index);
        take();
        Node* n = make(N::index);
        n->kids = {e, expr()};
        expect(T::rbrack);
        e = n;
      } else if (cur() == T::lparen) {
        p_.at(JB::p_call);
        take();
        Node* n = make(N::call);
        n->kids.push_back(e);
        args(n);
        expect(T::rparen);
        e = n;
      } else {
        return e;
      }
    }
  }

  void args(Node* n) {
    if (cur() == T::rparen || cur() == T::rbrack) return;
    p_.at(JB::p_args);
    n->kids.push_back(expr());
    while (cur() == T::comma) {
      take();
      n->kids.push_back(expr());
    }
  }

  Node* primary() {
    Depth d(*this);
    switch (cur()) {
      case T::number: {
        p_.at(JB::p_number);
        Node* n = make(N::num);
        n->str = take().text;
        if (n->str.size() > 2 && (n->str[1] == 'x' || n->str[1] == 'X'))
          n->num = static_cast<double>(std::strtoull(n->str.c_str() + 2, nullptr, 16));
        else
          n->num = std::strtod(n->str.c_str(), nullptr);
        return n;
      }
      case T::string: {
        p_.at(JB::p_string);
        Node* n = make(N::str);
        n->str = take().text;
        return n;
      }
      case T::regex: {
        p_.at(JB::p_regex);
        Node* n = make(N::regex);
        const std::string& text = take().text;
        std::size_t close = text.rfind('/');
        n->str = text.substr(1, close - 1);
        n->str2 = text.substr(close + 1);
        return n;
      }
      case T::ident: {
        p_.at(JB::p_ident);
        Node* n = make(N::ident);
        n->str = take().text;
        return n;
      }
      case T::kw_true:
      case T::kw_false:
      case T::kw_null:
      case T::kw_undefined: {
        p_.at(JB::p_literal);
        T t = take().type;
        return make(t == T::kw_true    ? N::true_
                    : t == T::kw_false ? N::false_
                    : t == T::kw_null  ? N::null_
                                       : N::undef);
      }
      case T::lparen: {
        p_.at(JB::p_paren);
        take();
        Node* e = expr();
        expect(T::rparen);
        return e;
      }
      case T::lbrack: {
        p_.at(JB::p_array);
        take();
        Node* n = make(N::array);
        args(n);
        expect(T::rbrack);
        return n;
      }
      case T::kw_function: {
        p_.at(JB::p_function_expr);
        take();
        Node* n = make(N::func);
        expect(T::lparen);
        n->params = params();
        expect(T::rparen);
        n->kids.push_back(block());
        return n;
      }
      default:
        p_.fail(JB::p_error);
    }
  }

  std::vector<Tok> t_;
  std::size_t k_ = 0;
  Probe& p_;
  std::deque<Node>& arena_;
  int depth_ = 0;
};

// ---------------------------------------------------------------- checker

const std::unordered_set<std::string_view>& builtin_names() {
  static const std::unordered_set<std::string_view> names = {
      "print", "RegExp", "Math", "String", "Number", "parseInt", "parseFloat",
      "isNaN", "NaN", "Infinity"};
  return names;
}

class Checker {
 public:
  explicit Checker(Probe& p) : p_(p) {}

  void run(Node* program) {
    p_.at(JB::c_entry);
    function_body(program, {});
    p_.at(JB::c_ok);
  }

 private:
  struct Scope {
    std::unordered_set<std::string> names;
  };

  void hoist(Node* n, Scope& s) {
    if (!n) return;
    switch (n->kind) {
      case N::var:
        p_.at(JB::c_hoist_var);
        s.names.insert(n->str);
        break;
      case N::func_decl:
        p_.at(JB::c_hoist_function);
        s.names.insert(n->str);
        return;
      case N::block:
      case N::if_:
      case N::while_:
      case N::for_:
      case N::try_:
        for (Node* k : n->kids) hoist(k, s);
        break;
      default:
        break;
    }
  }

  void function_body(Node* body, const std::vector<std::string>& params) {
    scopes_.push_back({});
    for (const auto& p : params)
      if (!scopes_.back().names.insert(p).second) p_.fail(JB::c_dup_param);
    hoist(body, scopes_.back());
    int saved_loops = loops_;
    loops_ = 0;
    ++functions_;
    stmt(body);
    --functions_;
    loops_ = saved_loops;
    scopes_.pop_back();
  }

  void resolve(const std::string& name) {
    for (std::size_t i = scopes_.size(); i-- > 0;) {
      if (scopes_[i].names.count(name)) {
        p_.at(i + 1 == scopes_.size() ? JB::c_ident_local : JB::c_ident_outer);
        return;
      }
    }
    if (builtin_names().count(name)) {
      p_.at(JB::c_ident_builtin);
      return;
    }
    p_.fail(JB::c_undeclared);
  }

  bool declared(const std::string& name) const {
    for (const auto& s : scopes_)
      if (s.names.count(name)) return true;
    return false;
  }

  void stmt(Node* n) {
    if (!n) return;
    switch (n->kind) {
      case N::block:
        for (Node* k : n->kids) stmt(k);
        break;
      case N::var:
      case N::expr_stmt:
      case N::throw_:
        for (Node* k : n->kids) expr(k);
        break;
      case N::func_decl:
        p_.at(JB::c_scope_function);
        function_body(n->kids[0], n->params);
        break;
      case N::if_:
        expr(n->kids[0]);
        for (std::size_t i = 1; i < n->kids.size(); ++i) stmt(n->kids[i]);
        break;
      case N::while_:
        p_.at(JB::c_loop);
        expr(n->kids[0]);
        ++loops_;
        stmt(n->kids[1]);
        --loops_;
        break;
      case N::for_:
        p_.at(JB::c_loop);
        stmt(n->kids[0]);
        if (n->kids[1]) expr(n->kids[1]);
        if (n->kids[2]) expr(n->kids[2]);
        ++loops_;
        stmt(n->kids[3]);
        --loops_;
        break;
      case N::return_:
        if (functions_ <= 1) p_.fail(JB::c_return_bad);
        p_.at(JB::c_return_ok);
        for (Node* k : n->kids) expr(k);
        break;
      case N::break_:
        if (loops_ == 0) p_.fail(JB::c_break_bad);
        p_.at(JB::c_break_ok);
        break;
      case N::continue_:
        if (loops_ == 0) p_.fail(JB::c_continue_bad);
        p_.at(JB::c_continue_ok);
        break;
      case N::try_:
        stmt(n->kids[0]);
        p_.at(JB::c_scope_catch);
        scopes_.push_back({});
        scopes_.back().names.insert(n->str2);
        stmt(n->kids[1]);
        scopes_.pop_back();
        break;
      default:
        break;
    }
  }

  void expr(Node* n) {
    switch (n->kind) {
      case N::ident:
        resolve(n->str);
        break;
      case N::func:
        p_.at(JB::c_scope_function);
        function_body(n->kids[0], n->params);
        break;
      case N::assign: {
        Node* target = n->kids[0];
        if (target->kind == N::ident) {
          if (!declared(target->str) && builtin_names().count(target->str))
            p_.fail(JB::c_assign_builtin);
          p_.at(JB::c_assign_ident);
        } else if (target->kind == N::member) {
          p_.at(JB::c_assign_member);
        } else if (target->kind == N::index) {
          p_.at(JB::c_assign_index);
        } else {
          p_.fail(JB::c_assign_bad);
        }
        for (Node* k : n->kids) expr(k);
        break;
      }
      case N::member:
        p_.at(JB::c_member);
        expr(n->kids[0]);
        break;
      case N::call:
        p_.at(JB::c_call);
        for (Node* k : n->kids) expr(k);
        break;
      default:
        for (Node* k : n->kids) expr(k);
        break;
    }
  }

  Probe& p_;
  std::vector<Scope> scopes_;
  int loops_ = 0;
  int functions_ = 0;
};

// ---------------------------------------------------------------- regex stub

// Backtracking matcher for a small pattern language: literals, '.', classes,
// \d \w \s (and negations), \b \B, ^ $, greedy * + ?, top-level '|'.
class MiniRegex {
 public:
  struct Item {
    enum Kind { set, bol, eol, word_boundary, not_word_boundary } kind = set;
    std::bitset<256> bytes;
    int min = 1, max = 1;
  };

  static std::optional<MiniRegex> compile(const std::string& src, bool icase, Probe& p) {
    MiniRegex re;
    re.icase_ = icase;
    re.alts_.emplace_back();
    for (std::size_t i = 0; i < src.size();) {
      char c = src[i];
      Item it;
      if (c == '|') {
        re.alts_.emplace_back();
        ++i;
        continue;
      }
      if (c == '(' || c == ')' || c == '{' || c == '}' || c == '*' || c == '+' || c == '?')
        return std::nullopt;
      if (c == '^') {
        it.kind = Item::bol;
        ++i;
      } else if (c == '$') {
        it.kind = Item::eol;
        ++i;
      } else if (c == '.') {
        it.bytes.set();
        it.bytes.reset('\n');
        ++i;
      } else if (c == '\\') {
        if (i + 1 >= src.size()) return std::nullopt;
        char e = src[i + 1];
        i += 2;
        if (e == 'b' || e == 'B') {
          p.at(JB::e_regex_word_boundary);
          it.kind = e == 'b' ? Item::word_boundary : Item::not_word_boundary;
        } else {
          it.bytes = escape_set(e);
        }
      } else if (c == '[') {
        p.at(JB::e_regex_class);
        std::size_t j = i + 1;
        bool neg = j < src.size() && src[j] == '^';
        if (neg) ++j;
        std::bitset<256> s;
        bool first = true;
        while (j < src.size() && (src[j] != ']' || first)) {
          first = false;
          unsigned char lo = static_cast<unsigned char>(src[j]);
          if (src[j] == '\\' && j + 1 < src.size()) {
            s |= escape_set(src[j + 1]);
            j += 2;
            continue;
          }
          if (j + 2 < src.size() && src[j + 1] == '-' && src[j + 2] != ']') {
            unsigned char hi = static_cast<unsigned char>(src[j + 2]);
            if (hi < lo) return std::nullopt;
            for (unsigned b = lo; b <= hi; ++b) s.set(b);
            j += 3;
            continue;
          }
          s.set(lo);
          ++j;
        }
        if (j >= src.size()) return std::nullopt;
        if (neg) s.flip();
        it.bytes = s;
        i = j + 1;
      } else {
        it.bytes.set(static_cast<unsigned char>(c));
        ++i;
      }
      if (i < src.size() && (src[i] == '*' || src[i] == '+' || src[i] == '?')) {
        if (it.kind != Item::set) return std::nullopt;
        it.min = src[i] == '+' ? 1 : 0;
        it.max = src[i] == '?' ? 1 : -1;
        ++i;
      }
      if (icase && it.kind == Item::set) {
        for (int b = 'a'; b <= 'z'; ++b) {
          if (it.bytes.test(b)) it.bytes.set(b - 32);
          if (it.bytes.test(b - 32)) it.bytes.set(b);
        }
      }
      re.alts_.back().push_back(it);
    }
    return re;
  }

  /// First match at or after `from`: {start, end}. Gives up after a step
  /// budget, reporting no match.
  std::optional<std::pair<std::size_t, std::size_t>> search(const std::string& s,
                                                            std::size_t from, Probe& p) {
    budget_ = 20000;
    for (std::size_t st = from; st <= s.size(); ++st) {
      for (const auto& alt : alts_) {
        std::size_t end;
        if (match(alt, 0, s, st, end)) return std::make_pair(st, end);
        if (budget_ <= 0) {
          p.at(JB::e_regex_budget);
          return std::nullopt;
        }
      }
    }
    return std::nullopt;
  }

 private:
  static std::bitset<256> escape_set(char e) {
    std::bitset<256> s;
    auto range = [&s](int lo, int hi) {
      for (int b = lo; b <= hi; ++b) s.set(static_cast<std::size_t>(b));
    };
    switch (e) {
      case 'd': range('0', '9'); break;
      case 'D': range('0', '9'); s.flip(); break;
      case 'w':
      case 'W':
        range('0', '9');
        range('a', 'z');
        range('A', 'Z');
        s.set('_');
        if (e == 'W') s.flip();
        break;
      case 's':
      case 'S':
        for (char c : std::string_view(" \t\r\n\f\v")) s.set(static_cast<unsigned char>(c));
        if (e == 'S') s.flip();
        break;
      case 'n': s.set('\n'); break;
      case 't': s.set('\t'); break;
      default: s.set(static_cast<unsigned char>(e));
    }
    return s;
  }

  static bool word(const std::string& s, std::size_t i) {
    return i < s.size() && (is_ident_char(s[i]) && s[i] != '$');
  }

  bool match(const std::vector<Item>& items, std::size_t k, const std::string& s,
             std::size_t i, std::size_t& end) {
    if (--budget_ <= 0) return false;
    if (k == items.size()) {
      end = i;
      return true;
    }
    const Item& it = items[k];
    switch (it.kind) {
      case Item::bol: return i == 0 && match(items, k + 1, s, i, end);
      case Item::eol: return i == s.size() && match(items, k + 1, s, i, end);
      case Item::word_boundary:
      case Item::not_word_boundary: {
        bool at = (i > 0 && word(s, i - 1)) != word(s, i);
        if (at != (it.kind == Item::word_boundary)) return false;
        return match(items, k + 1, s, i, end);
      }
      case Item::set: break;
    }
    std::size_t n = 0;
    std::size_t limit = s.size() - i;
    if (it.max >= 0) limit = std::min(limit, static_cast<std::size_t>(it.max));
    while (n < limit && it.bytes.test(static_cast<unsigned char>(s[i + n]))) ++n;
    for (std::size_t take = n + 1; take-- > static_cast<std::size_t>(it.min);) {
      if (match(items, k + 1, s, i + take, end)) return true;
      if (budget_ <= 0) return false;
    }
    return false;
  }

  std::vector<std::vector<Item>> alts_;
  bool icase_ = false;
  int budget_ = 0;
};

// ---------------------------------------------------------------- evaluator

enum class VT : std::uint8_t { undef, null, boolean, number, string, array, function,
                                regex, builtin, method };
enum class Builtin : std::uint8_t { print, regexp, math, string, number, parse_int,
                                     parse_float, is_nan };

struct Env;
struct Array;
struct Closure;
struct RegexObj;
struct Method;

struct Value {
  VT t = VT::undef;
  bool b = false;
  double n = 0;
  std::string s;
  void* p = nullptr;
  Builtin bi = Builtin::print;
};

struct Array {
  std::vector<Value> items;
};
struct Closure {
  Node* fn;
  Env* env;
};
struct RegexObj {
  std::string source, flags;
  MiniRegex re;
  std::size_t last_index = 0;
  bool global() const { return flags.find('g') != std::string::npos; }
};
struct Method {
  Value self;
  std::string name;
};
struct Env {
  std::unordered_map<std::string, Value> vars;
  Env* parent = nullptr;
};

struct JsThrow {
  Value v;
};
struct StepLimit {};

constexpr std::size_t kMaxString = 1 << 16;
constexpr std::size_t kMaxArray = 4096;

Value undef() { return {}; }
Value num(double d) {
  Value v;
  v.t = VT::number;
  v.n = d;
  return v;
}
Value str(std::string s) {
  Value v;
  v.t = VT::string;
  v.s = std::move(s);
  return v;
}
Value boolean(bool b) {
  Value v;
  v.t = VT::boolean;
  v.b = b;
  return v;
}

std::string number_to_string(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
  if (d == 0) return "0";
  if (std::fabs(d) < 1e21 && d == std::floor(d)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", d);
    return buf;
  }
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, d);
    if (std::strtod(buf, nullptr) == d) break;
  }
  return buf;
}

class Interp {
 public:
  explicit Interp(Probe& p) : p_(p) {}

  void run(Node* program) {
    p_.at(JB::e_entry);
    Env* global = new_env(nullptr);
    try {
      exec_body(program, global);
      p_.at(JB::e_ok);
    } catch (const JsThrow&) {
      p_.at(JB::e_uncaught);
    } catch (const StepLimit&) {
      p_.at(JB::e_step_limit);
    }
  }

 private:
  enum class Flow { normal, brk, cont, ret };

  template <class X, class... A>
  X* alloc(std::deque<X>& pool, A&&... a) {
    pool.push_back(X{std::forward<A>(a)...});
    return &pool.back();
  }
  Env* new_env(Env* parent) {
    Env* e = alloc(envs_);
    e->parent = parent;
    return e;
  }
  Value make_array(std::vector<Value> items) {
    Value v;
    v.t = VT::array;
    v.p = alloc(arrays_, std::move(items));
    return v;
  }
  Value make_method(const Value& self, std::string name) {
    Value v;
    v.t = VT::method;
    v.p = alloc(methods_, self, std::move(name));
    return v;
  }
  Value make_builtin(Builtin b) {
    Value v;
    v.t = VT::builtin;
    v.bi = b;
    return v;
  }
  Value null_value() {
    Value v;
    v.t = VT::null;
    return v;
  }
  [[noreturn]] void throw_error(const std::string& kind, const std::string& msg) {
    if (kind == "RangeError") p_.at(JB::e_range_error);
    throw JsThrow{str(kind + ": " + msg)};
  }
  void step() {
    if (++steps_ > 20000) throw StepLimit{};
  }
  std::string checked(std::string s) {
    if (s.size() > kMaxString) throw_error("RangeError", "string too long");
    return s;
  }

  Value make_regex(const std::string& source, const std::string& flags) {
    bool icase = flags.find('i') != std::string::npos;
    auto re = MiniRegex::compile(source, icase, p_);
    if (!re) {
      p_.at(JB::e_regex_syntax_error);
      throw_error("SyntaxError", "invalid regular expression");
    }
    p_.at(JB::e_regex_compile);
    if (icase) p_.at(JB::e_regex_icase);
    Value v;
    v.t = VT::regex;
    v.p = alloc(regexes_, source, flags, std::move(*re), std::size_t{0});
    return v;
  }

  // Runs the regex and records the match in the RegExp statics.
  std::optional<std::pair<std::size_t, std::size_t>> regex_search(RegexObj& r,
                                                                  const std::string& s,
                                                                  std::size_t from) {
    auto m = r.re.search(s, from, p_);
    if (!m) {
      p_.at(JB::e_regex_nomatch);
      return m;
    }
    p_.at(JB::e_regex_match);
    statics_.input = s;
    statics_.start = m->first;
    statics_.end = m->second;
    statics_.last_match = s.substr(m->first, m->second - m->first);
    statics_.has_match = true;
    return m;
  }

  // ---- conversions

  std::string join_array(const Array& a, const std::string& sep) {
    if (std::find(joining_.begin(), joining_.end(), &a) != joining_.end()) return "";
    joining_.push_back(&a);
    struct Pop {
      std::vector<const Array*>& v;
      ~Pop() { v.pop_back(); }
    } pop{joining_};
    std::string out;
    for (std::size_t i = 0; i < a.items.size(); ++i) {
      if (i) out += sep;
      if (a.items[i].t != VT::undef && a.items[i].t != VT::null) out += to_string(a.items[i]);
      if (out.size() > kMaxString) throw_error("RangeError", "string too long");
    }
    return out;
  }

  std::string to_string(const Value& v) {
    switch (v.t) {
      case VT::undef: return "undefined";
      case VT::null: return "null";
      case VT::boolean: return v.b ? "true" : "false";
      case VT::number: return number_to_string(v.n);
      case VT::string: return v.s;
      case VT::array: return join_array(*static_cast<Array*>(v.p), ",");
      case VT::function:
      case VT::method:
      case VT::builtin: return "function";
      case VT::regex: {
        auto* r = static_cast<RegexObj*>(v.p);
        return "/" + r->source + "/" + r->flags;
      }
    }
    return "";
  }

  double to_number(const Value& v) {
    switch (v.t) {
      case VT::undef: return NAN;
      case VT::null: return 0;
      case VT::boolean: return v.b ? 1 : 0;
      case VT::number: return v.n;
      case VT::string: {
        std::string s = v.s;
        auto b = s.find_first_not_of(" \t\n\r");
        if (b == std::string::npos) return 0;
        s = s.substr(b, s.find_last_not_of(" \t\n\r") - b + 1);
        if (s == "Infinity" || s == "+Infinity") return INFINITY;
        if (s == "-Infinity") return -INFINITY;
        if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
          char* end;
          double d = static_cast<double>(std::strtoull(s.c_str() + 2, &end, 16));
          return *end ? NAN : d;
        }
        for (char c : s)
          if (!(is_digit(c) || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-'))
            return NAN;
        char* end;
        double d = std::strtod(s.c_str(), &end);
        return *end ? NAN : d;
      }
      case VT::array: return to_number(str(to_string(v)));
      default: return NAN;
    }
  }

  bool truthy(const Value& v) {
    switch (v.t) {
      case VT::undef:
      case VT::null: return false;
      case VT::boolean: return v.b;
      case VT::number: return v.n != 0 && !std::isnan(v.n);
      case VT::string: return !v.s.empty();
      default: return true;
    }
  }

  bool loose_equal(const Value& a, const Value& b) {
    p_.at(JB::e_equality);
    bool a_nil = a.t == VT::undef || a.t == VT::null;
    bool b_nil = b.t == VT::undef || b.t == VT::null;
    if (a_nil || b_nil) return a_nil && b_nil;
    if (a.t == VT::string && b.t == VT::string) return a.s == b.s;
    if (a.t == b.t && (a.t == VT::array || a.t == VT::function || a.t == VT::regex ||
                       a.t == VT::method))
      return a.p == b.p;
    if (a.t == VT::builtin && b.t == VT::builtin) return a.bi == b.bi;
    return to_number(a) == to_number(b);
  }

  // ---- statements

  void hoist_functions(Node* n, Env* env) {
    if (!n) return;
    if (n->kind == N::func_decl) {
      Value v;
      v.t = VT::function;
      v.p = alloc(closures_, n, env);
      env->vars[n->str] = v;
      return;
    }
    if (n->kind == N::var) {
      env->vars.try_emplace(n->str);
      return;
    }
    if (n->kind == N::block || n->kind == N::if_ || n->kind == N::while_ ||
        n->kind == N::for_ || n->kind == N::try_)
      for (Node* k : n->kids) hoist_functions(k, env);
  }

  Value exec_body(Node* body, Env* env) {
    hoist_functions(body, env);
    Value ret;
    exec(body, env, ret);
    return ret;
  }

  Value* lookup(const std::string& name, Env* env) {
    for (Env* e = env; e; e = e->parent) {
      auto it = e->vars.find(name);
      if (it != e->vars.end()) return &it->second;
    }
    return nullptr;
  }

  Value builtin_global(const std::string& name) {
    if (name == "print") return make_builtin(Builtin::print);
    if (name == "RegExp") return make_builtin(Builtin::regexp);
    if (name == "Math") return make_builtin(Builtin::math);
    if (name == "String") return make_builtin(Builtin::string);
    if (name == "Number") return make_builtin(Builtin::number);
    if (name == "parseInt") return make_builtin(Builtin::parse_int);
    if (name == "parseFloat") return make_builtin(Builtin::parse_float);
    if (name == "isNaN") return make_builtin(Builtin::is_nan);
    if (name == "NaN") return num(NAN);
    if (name == "Infinity") return num(INFINITY);
    return undef();
  }

  Flow exec(Node* n, Env* env, Value& ret) {
    if (!n) return Flow::normal;
    step();
    switch (n->kind) {
      case N::block:
        for (Node* k : n->kids) {
          Flow f = exec(k, env, ret);
          if (f != Flow::normal) return f;
        }
        return Flow::normal;
      case N::var:
        p_.at(JB::e_var);
        if (!n->kids.empty()) assign_var(n->str, eval(n->kids[0], env), env);
        return Flow::normal;
      case N::func_decl:
      case N::empty:
        return Flow::normal;
      case N::expr_stmt:
        eval(n->kids[0], env);
        return Flow::normal;
      case N::if_:
        if (truthy(eval(n->kids[0], env))) {
          p_.at(JB::e_if_true);
          return exec(n->kids[1], env, ret);
        }
        p_.at(JB::e_if_false);
        return n->kids.size() > 2 ? exec(n->kids[2], env, ret) : Flow::normal;
      case N::while_:
        while (truthy(eval(n->kids[0], env))) {
          p_.at(JB::e_while_iter);
          Flow f = exec(n->kids[1], env, ret);
          if (f == Flow::brk) break;
          if (f == Flow::ret) return f;
        }
        return Flow::normal;
      case N::for_: {
        exec(n->kids[0], env, ret);
        while (!n->kids[1] || truthy(eval(n->kids[1], env))) {
          p_.at(JB::e_for_iter);
          Flow f = exec(n->kids[3], env, ret);
          if (f == Flow::brk) break;
          if (f == Flow::ret) return f;
          if (n->kids[2]) eval(n->kids[2], env);
          step();
        }
        return Flow::normal;
      }
      case N::return_:
        p_.at(JB::e_return);
        ret = n->kids.empty() ? undef() : eval(n->kids[0], env);
        return Flow::ret;
      case N::break_:
        p_.at(JB::e_break);
        return Flow::brk;
      case N::continue_:
        p_.at(JB::e_continue);
        return Flow::cont;
      case N::throw_:
        p_.at(JB::e_throw);
        throw JsThrow{eval(n->kids[0], env)};
      case N::try_: {
        try {
          return exec(n->kids[0], env, ret);
        } catch (JsThrow& t) {
          p_.at(JB::e_catch);
          Env* scope = new_env(env);
          scope->vars[n->str2] = t.v;
          return exec(n->kids[1], scope, ret);
        }
      }
      default:
        return Flow::normal;
    }
  }

  void assign_var(const std::string& name, Value v, Env* env) {
    if (Value* slot = lookup(name, env)) {
      *slot = std::move(v);
      return;
    }
    env->vars[name] = std::move(v);
  }

  // ---- expressions

  Value eval(Node* n, Env* env) {
    step();
    switch (n->kind) {
      case N::num: return num(n->num);
      case N::str: return str(n->str);
      case N::regex: return make_regex(n->str, n->str2);
      case N::true_: return boolean(true);
      case N::false_: return boolean(false);
      case N::null_: return null_value();
      case N::undef: return undef();
      case N::ident: {
        if (Value* v = lookup(n->str, env)) return *v;
        return builtin_global(n->str);
      }
      case N::array: {
        p_.at(JB::e_array_literal);
        std::vector<Value> items;
        for (Node* k : n->kids) items.push_back(eval(k, env));
        return make_array(std::move(items));
      }
      case N::func: {
        Value v;
        v.t = VT::function;
        v.p = alloc(closures_, n, env);
        return v;
      }
      case N::unary: return unary(n->op, eval(n->kids[0], env));
      case N::binary: return binary(n, env);
      case N::assign: return assign(n, env);
      case N::member: return get_member(eval(n->kids[0], env), n->str);
      case N::index: {
        Value obj = eval(n->kids[0], env);
        return get_index(obj, eval(n->kids[1], env));
      }
      case N::call: return call_expr(n, env);
      default: return undef();
    }
  }

  Value unary(T op, const Value& v) {
    if (op == T::not_) {
      p_.at(JB::e_not);
      return boolean(!truthy(v));
    }
    if (op == T::minus) {
      p_.at(JB::e_neg);
      return num(-to_number(v));
    }
    p_.at(JB::e_typeof);
    switch (v.t) {
      case VT::undef: return str("undefined");
      case VT::boolean: return str("boolean");
      case VT::number: return str("number");
      case VT::string: return str("string");
      case VT::function:
      case VT::method: return str("function");
      case VT::builtin:
        return str(v.bi == Builtin::math ? "object" : "function");
      default: return str("object");
    }
  }

  Value arith(T op, const Value& a, const Value& b) {
    if (op == T::plus) {
      bool concat = a.t == VT::string || b.t == VT::string || a.t == VT::array ||
                    b.t == VT::array || a.t == VT::regex || b.t == VT::regex;
      if (concat) {
        p_.at(JB::e_add_string);
        return str(checked(to_string(a) + to_string(b)));
      }
      p_.at(JB::e_add_number);
      return num(to_number(a) + to_number(b));
    }
    p_.at(JB::e_arith);
    double x = to_number(a), y = to_number(b), r = 0;
    switch (op) {
      case T::minus: r = x - y; break;
      case T::star: r = x * y; break;
      case T::slash:
        if (y == 0) p_.at(JB::e_div_zero);
        r = x / y;
        break;
      case T::percent:
        if (y == 0) p_.at(JB::e_div_zero);
        r = std::fmod(x, y);
        break;
      default: break;
    }
    if (std::isnan(r)) p_.at(JB::e_nan);
    if (std::isinf(r)) p_.at(JB::e_infinity);
    return num(r);
  }

  Value binary(Node* n, Env* env) {
    T op = n->op;
    if (op == T::and_ || op == T::or_) {
      p_.at(JB::e_logical);
      Value l = eval(n->kids[0], env);
      if (truthy(l) == (op == T::or_)) return l;
      return eval(n->kids[1], env);
    }
    Value a = eval(n->kids[0], env);
    Value b = eval(n->kids[1], env);
    switch (op) {
      case T::eq: return boolean(loose_equal(a, b));
      case T::ne: return boolean(!loose_equal(a, b));
      case T::lt:
      case T::gt:
      case T::le:
      case T::ge: {
        int c;
        if (a.t == VT::string && b.t == VT::string) {
          p_.at(JB::e_compare_string);
          c = a.s < b.s ? -1 : a.s > b.s ? 1 : 0;
        } else {
          p_.at(JB::e_compare_number);
          double x = to_number(a), y = to_number(b);
          if (std::isnan(x) || std::isnan(y)) return boolean(false);
          c = x < y ? -1 : x > y ? 1 : 0;
        }
        return boolean(op == T::lt ? c < 0 : op == T::gt ? c > 0 : op == T::le ? c <= 0 : c >= 0);
      }
      default: return arith(op, a, b);
    }
  }

  Value assign(Node* n, Env* env) {
    Node* target = n->kids[0];
    Value v = eval(n->kids[1], env);
    if (n->op != T::assign) {
      p_.at(JB::e_compound_assign);
      Value old = eval(target, env);
      v = arith(n->op == T::plus_assign ? T::plus : T::minus, old, v);
    } else {
      p_.at(JB::e_assign);
    }
    if (target->kind == N::ident) {
      assign_var(target->str, v, env);
    } else if (target->kind == N::member) {
      set_member(eval(target->kids[0], env), target->str, v);
    } else if (target->kind == N::index) {
      Value obj = eval(target->kids[0], env);
      set_index(obj, eval(target->kids[1], env), v);
    }
    return v;
  }

  // ---- properties

  Value get_member(const Value& obj, const std::string& name) {
    switch (obj.t) {
      case VT::undef:
      case VT::null:
        p_.at(JB::e_member_of_nothing);
        throw_error("TypeError", "cannot read property '" + name + "'");
      case VT::string: {
        if (name == "length") {
          p_.at(JB::e_str_length);
          return num(static_cast<double>(obj.s.size()));
        }
        static const std::unordered_set<std::string_view> methods = {
            "charAt", "charCodeAt", "indexOf", "substring", "slice", "toUpperCase",
            "toLowerCase", "replace", "match", "search", "split", "trim", "concat",
            "repeat"};
        if (methods.count(name)) return make_method(obj, name);
        break;
      }
      case VT::array: {
        if (name == "length")
          return num(static_cast<double>(static_cast<Array*>(obj.p)->items.size()));
        static const std::unordered_set<std::string_view> methods = {
            "push", "pop", "join", "indexOf", "slice", "reverse"};
        if (methods.count(name)) return make_method(obj, name);
        break;
      }
      case VT::number:
        if (name == "toString" || name == "toFixed") return make_method(obj, name);
        break;
      case VT::regex: {
        auto* r = static_cast<RegexObj*>(obj.p);
        if (name == "source") return str(r->source);
        if (name == "global") return boolean(r->global());
        if (name == "lastIndex") return num(static_cast<double>(r->last_index));
        if (name == "test" || name == "exec") return make_method(obj, name);
        break;
      }
      case VT::function:
        if (name == "length")
          return num(static_cast<double>(static_cast<Closure*>(obj.p)->fn->params.size()));
        break;
      case VT::builtin:
        if (obj.bi == Builtin::regexp) return regexp_static(name);
        if (obj.bi == Builtin::math) {
          if (name == "PI") return num(M_PI);
          if (name == "E") return num(M_E);
          static const std::unordered_set<std::string_view> methods = {
              "floor", "ceil", "abs", "max", "min", "sqrt", "pow", "round"};
          if (methods.count(name)) return make_method(obj, name);
        }
        break;
      default:
        break;
    }
    p_.at(JB::e_property_missing);
    return undef();
  }

  Value regexp_static(const std::string& name) {
    if (name == "input" || name == "$_") {
      p_.at(JB::e_regexp_input_get);
      return str(statics_.input);
    }
    if (name == "lastMatch") {
      p_.at(JB::e_regexp_last_match);
      return str(statics_.last_match);
    }
    if (name == "leftContext") {
      p_.at(JB::e_regexp_left_context);
      if (!statics_.has_match) return str("");
      return str(statics_.input.substr(0, std::min(statics_.start, statics_.input.size())));
    }
    if (name == "rightContext") {
      p_.at(JB::e_regexp_right_context);
      if (!statics_.has_match) return str("");
      std::size_t len = statics_.input.size();
      if (statics_.end == len) {
        p_.at(JB::e_regexp_right_context_empty);
        return str("");
      }
      // The count is computed from the match end recorded against the
      // subject, but the input may have been reassigned since.
      std::size_t count = len - statics_.end;
      if (count > len) p_.sink().crash("minijs-rightcontext-underflow");
      return str(statics_.input.substr(statics_.end, count));
    }
    p_.at(JB::e_property_missing);
    return undef();
  }

  void set_member(const Value& obj, const std::string& name, const Value& v) {
    if (obj.t == VT::undef || obj.t == VT::null) {
      p_.at(JB::e_member_of_nothing);
      throw_error("TypeError", "cannot set property '" + name + "'");
    }
    if (obj.t == VT::builtin && obj.bi == Builtin::regexp && (name == "input" || name == "$_")) {
      p_.at(JB::e_regexp_input_set);
      statics_.input = to_string(v);
      return;
    }
    if (obj.t == VT::array && name == "length") {
      p_.at(JB::e_array_length_set);
      double d = to_number(v);
      if (!(d >= 0 && d <= kMaxArray) || d != std::floor(d))
        throw_error("RangeError", "invalid array length");
      static_cast<Array*>(obj.p)->items.resize(static_cast<std::size_t>(d));
      return;
    }
    p_.at(JB::e_readonly_set);
  }

  Value get_index(const Value& obj, const Value& key) {
    p_.at(JB::e_index_get);
    if (key.t == VT::number && (obj.t == VT::array || obj.t == VT::string)) {
      double d = key.n;
      std::size_t size = obj.t == VT::array ? static_cast<Array*>(obj.p)->items.size()
                                            : obj.s.size();
      if (!(d >= 0) || d != std::floor(d) || d >= static_cast<double>(size)) {
        p_.at(JB::e_index_out_of_range);
        return undef();
      }
      auto i = static_cast<std::size_t>(d);
      if (obj.t == VT::array) return static_cast<Array*>(obj.p)->items[i];
      return str(std::string(1, obj.s[i]));
    }
    return get_member(obj, to_string(key));
  }

  void set_index(const Value& obj, const Value& key, const Value& v) {
    p_.at(JB::e_index_set);
    if (obj.t == VT::array && key.t == VT::number) {
      double d = key.n;
      if (!(d >= 0) || d != std::floor(d) || d >= kMaxArray)
        throw_error("RangeError", "invalid array index");
      auto& items = static_cast<Array*>(obj.p)->items;
      auto i = static_cast<std::size_t>(d);
      if (i >= items.size()) {
        p_.at(JB::e_array_grow);
        items.resize(i + 1);
      }
      items[i] = v;
      return;
    }
    set_member(obj, to_string(key), v);
  }

  // ---- calls

  Value call_expr(Node* n, Env* env) {
    Value callee = eval(n->kids[0], env);
    std::vector<Value> args;
    for (std::size_t i = 1; i < n->kids.size(); ++i) args.push_back(eval(n->kids[i], env));
    return call(callee, args);
  }

  Value call(const Value& f, std::vector<Value>& args) {
    switch (f.t) {
      case VT::function: {
        p_.at(JB::e_call_closure);
        if (depth_ >= 48) {
          p_.at(JB::e_recursion_limit);
          throw_error("RangeError", "maximum call stack size exceeded");
        }
        auto* c = static_cast<Closure*>(f.p);
        Env* scope = new_env(c->env);
        for (std::size_t i = 0; i < c->fn->params.size(); ++i)
          scope->vars[c->fn->params[i]] = i < args.size() ? args[i] : undef();
        ++depth_;
        Value r;
        try {
          r = exec_body(c->fn->kids[0], scope);
        } catch (...) {
          --depth_;
          throw;
        }
        --depth_;
        return r;
      }
      case VT::builtin:
        p_.at(JB::e_call_builtin);
        return call_builtin(f.bi, args);
      case VT::method:
        p_.at(JB::e_call_method);
        return call_method(*static_cast<Method*>(f.p), args);
      default:
        p_.at(JB::e_call_non_function);
        throw_error("TypeError", "not a function");
    }
  }

  Value arg(std::vector<Value>& args, std::size_t i) {
    return i < args.size() ? args[i] : undef();
  }

  Value call_builtin(Builtin b, std::vector<Value>& args) {
    switch (b) {
      case Builtin::print: {
        p_.at(JB::e_print);
        std::string line;
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) line += ' ';
          line += to_string(args[i]);
        }
        if (g_output.size() < kMaxString) g_output += line + "\n";
        return undef();
      }
      case Builtin::regexp: {
        p_.at(JB::e_regexp_ctor);
        Value src = arg(args, 0);
        if (src.t == VT::regex) return src;
        Value flags = arg(args, 1);
        return make_regex(src.t == VT::undef ? "" : to_string(src),
                          flags.t == VT::undef ? "" : to_string(flags));
      }
      case Builtin::string:
        p_.at(JB::e_string_ctor);
        return str(args.empty() ? "" : to_string(args[0]));
      case Builtin::number:
        p_.at(JB::e_number_ctor);
        return num(args.empty() ? 0 : to_number(args[0]));
      case Builtin::parse_int: {
        p_.at(JB::e_parse_int);
        std::string s = to_string(arg(args, 0));
        int radix = args.size() > 1 ? static_cast<int>(to_number(args[1])) : 10;
        if (radix != 0 && (radix < 2 || radix > 36)) return num(NAN);
        if (radix == 0) radix = 10;
        std::size_t i = s.find_first_not_of(" \t\n\r");
        if (i == std::string::npos) return num(NAN);
        bool neg = false;
        if (s[i] == '-' || s[i] == '+') neg = s[i++] == '-';
        double v = 0;
        bool any = false;
        for (; i < s.size(); ++i) {
          int d = is_digit(s[i]) ? s[i] - '0'
                  : std::isalpha(static_cast<unsigned char>(s[i]))
                      ? std::tolower(s[i]) - 'a' + 10
                      : 99;
          if (d >= radix) break;
          v = v * radix + d;
          any = true;
        }
        return num(any ? (neg ? -v : v) : NAN);
      }
      case Builtin::parse_float: {
        p_.at(JB::e_parse_float);
        std::string s = to_string(arg(args, 0));
        char* end;
        double d = std::strtod(s.c_str(), &end);
        return num(end == s.c_str() ? NAN : d);
      }
      case Builtin::is_nan:
        p_.at(JB::e_is_nan);
        return boolean(std::isnan(to_number(arg(args, 0))));
      case Builtin::math:
        break;
    }
    p_.at(JB::e_call_non_function);
    throw_error("TypeError", "not a function");
  }

  static std::size_t clamp_index(double d, std::size_t size) {
    if (std::isnan(d)) return 0;
    if (d < 0) d = std::max(0.0, static_cast<double>(size) + d);
    return static_cast<std::size_t>(std::min(d, static_cast<double>(size)));
  }

  Value call_method(Method& m, std::vector<Value>& args) {
    const Value& self = m.self;
    const std::string& name = m.name;
    if (self.t == VT::string) return string_method(self.s, name, args);
    if (self.t == VT::array) return array_method(*static_cast<Array*>(self.p), name, args);
    if (self.t == VT::number) {
      if (name == "toString") {
        p_.at(JB::e_num_to_string);
        return str(number_to_string(self.n));
      }
      p_.at(JB::e_num_to_fixed);
      double digits = args.empty() ? 0 : to_number(args[0]);
      if (!(digits >= 0 && digits <= 20)) throw_error("RangeError", "toFixed() digits");
      if (!std::isfinite(self.n) || std::fabs(self.n) >= 1e21)
        return str(number_to_string(self.n));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", static_cast<int>(digits), self.n);
      return str(buf);
    }
    if (self.t == VT::regex) {
      auto& r = *static_cast<RegexObj*>(self.p);
      std::string s = to_string(arg(args, 0));
      std::size_t from = 0;
      if (r.global()) {
        p_.at(JB::e_regex_global);
        from = r.last_index;
        if (from > s.size()) {
          r.last_index = 0;
          return name == "test" ? boolean(false) : null_value();
        }
      }
      auto match = regex_search(r, s, from);
      if (r.global()) r.last_index = match ? std::max(match->second, match->first + 1) : 0;
      if (name == "test") {
        p_.at(JB::e_regex_test);
        return boolean(match.has_value());
      }
      p_.at(JB::e_regex_exec);
      if (!match) return null_value();
      return make_array({str(s.substr(match->first, match->second - match->first))});
    }
    if (self.t == VT::builtin && self.bi == Builtin::math) {
      p_.at(JB::e_math);
      double x = to_number(arg(args, 0));
      if (name == "floor") return num(std::floor(x));
      if (name == "ceil") return num(std::ceil(x));
      if (name == "abs") return num(std::fabs(x));
      if (name == "sqrt") return num(std::sqrt(x));
      if (name == "round") return num(std::floor(x + 0.5));
      if (name == "pow") return num(std::pow(x, to_number(arg(args, 1))));
      double acc = name == "max" ? -INFINITY : INFINITY;
      for (auto& a : args) {
        double v = to_number(a);
        if (std::isnan(v)) return num(NAN);
        acc = name == "max" ? std::max(acc, v) : std::min(acc, v);
      }
      return num(acc);
    }
    throw_error("TypeError", "not a function");
  }

  RegexObj* as_regex(Value& v) {
    if (v.t == VT::regex) return static_cast<RegexObj*>(v.p);
    return nullptr;
  }

  Value string_method(const std::string& s, const std::string& name, std::vector<Value>& args) {
    if (name == "charAt" || name == "charCodeAt") {
      p_.at(JB::e_str_char_at);
      double d = args.empty() ? 0 : to_number(args[0]);
      if (!(d >= 0) || d >= static_cast<double>(s.size()))
        return name == "charAt" ? str("") : num(NAN);
      auto i = static_cast<std::size_t>(d);
      if (name == "charAt") return str(std::string(1, s[i]));
      return num(static_cast<unsigned char>(s[i]));
    }
    if (name == "indexOf") {
      p_.at(JB::e_str_index_of);
      std::size_t at = s.find(to_string(arg(args, 0)));
      return num(at == std::string::npos ? -1 : static_cast<double>(at));
    }
    if (name == "substring" || name == "slice") {
      p_.at(name == "slice" ? JB::e_str_slice : JB::e_str_substring);
      double a = args.empty() ? 0 : to_number(args[0]);
      double b = args.size() > 1 ? to_number(args[1]) : static_cast<double>(s.size());
      std::size_t x, y;
      if (name == "slice") {
        x = clamp_index(a, s.size());
        y = clamp_index(b, s.size());
      } else {
        x = clamp_index(std::max(a, 0.0), s.size());
        y = clamp_index(std::max(b, 0.0), s.size());
        if (x > y) std::swap(x, y);
      }
      return str(x < y ? s.substr(x, y - x) : "");
    }
    if (name == "toUpperCase" || name == "toLowerCase") {
      p_.at(JB::e_str_case);
      std::string out = s;
      for (char& c : out)
        c = static_cast<char>(name == "toUpperCase" ? std::toupper(static_cast<unsigned char>(c))
                                                    : std::tolower(static_cast<unsigned char>(c)));
      return str(out);
    }
    if (name == "trim") {
      p_.at(JB::e_str_trim);
      auto b = s.find_first_not_of(" \t\n\r");
      if (b == std::string::npos) return str("");
      return str(s.substr(b, s.find_last_not_of(" \t\n\r") - b + 1));
    }
    if (name == "concat") {
      p_.at(JB::e_str_concat);
      std::string out = s;
      for (auto& a : args) out += to_string(a);
      return str(checked(out));
    }
    if (name == "repeat") {
      p_.at(JB::e_str_repeat);
      double d = args.empty() ? 0 : to_number(args[0]);
      if (!(d >= 0) || std::isinf(d)) throw_error("RangeError", "invalid count");
      if (d * static_cast<double>(s.size()) > kMaxString) throw_error("RangeError", "string too long");
      std::string out;
      for (auto i = static_cast<std::size_t>(d); i > 0; --i) out += s;
      return str(out);
    }
    if (name == "split") {
      p_.at(JB::e_str_split);
      std::vector<Value> parts;
      Value sep = arg(args, 0);
      if (sep.t == VT::undef) return make_array({str(s)});
      std::string d = to_string(sep);
      if (d.empty()) {
        for (std::size_t i = 0; i < s.size() && parts.size() < kMaxArray; ++i)
          parts.push_back(str(std::string(1, s[i])));
        return make_array(std::move(parts));
      }
      std::size_t b = 0;
      while (parts.size() < kMaxArray) {
        std::size_t e = s.find(d, b);
        parts.push_back(str(s.substr(b, e == std::string::npos ? std::string::npos : e - b)));
        if (e == std::string::npos) break;
        b = e + d.size();
      }
      return make_array(std::move(parts));
    }
    if (name == "replace") return replace(s, args);
    if (name == "match" || name == "search") {
      Value pat = arg(args, 0);
      RegexObj* r = as_regex(pat);
      Value made;
      if (!r) {
        made = make_regex(pat.t == VT::undef ? "" : to_string(pat), "");
        r = static_cast<RegexObj*>(made.p);
      }
      if (name == "search") {
        p_.at(JB::e_str_search);
        auto m = regex_search(*r, s, 0);
        return num(m ? static_cast<double>(m->first) : -1);
      }
      p_.at(JB::e_str_match);
      std::vector<Value> found;
      std::size_t from = 0;
      while (from <= s.size() && found.size() < kMaxArray) {
        auto m = regex_search(*r, s, from);
        if (!m) break;
        found.push_back(str(s.substr(m->first, m->second - m->first)));
        if (!r->global()) break;
        from = std::max(m->second, m->first + 1);
      }
      if (found.empty()) {
        p_.at(JB::e_str_match_null);
        return null_value();
      }
      return make_array(std::move(found));
    }
    throw_error("TypeError", "not a function");
  }

  static std::string expand_replacement(const std::string& rep, const std::string& matched) {
    std::string out;
    for (std::size_t i = 0; i < rep.size(); ++i) {
      if (rep[i] == '$' && i + 1 < rep.size() && rep[i + 1] == '&') {
        out += matched;
        ++i;
      } else {
        out += rep[i];
      }
    }
    return out;
  }

  Value replace(const std::string& s, std::vector<Value>& args) {
    Value pat = arg(args, 0);
    std::string rep = to_string(arg(args, 1));
    RegexObj* r = as_regex(pat);
    if (!r) {
      p_.at(JB::e_str_replace_str);
      std::string needle = to_string(pat);
      std::size_t at = s.find(needle);
      if (at == std::string::npos) return str(s);
      return str(checked(s.substr(0, at) + expand_replacement(rep, needle) +
                         s.substr(at + needle.size())));
    }
    p_.at(JB::e_str_replace_regex);
    if (r->global()) p_.at(JB::e_str_replace_global);
    std::string out;
    std::size_t from = 0, copied = 0;
    while (from <= s.size()) {
      auto m = regex_search(*r, s, from);
      if (!m) break;
      out += s.substr(copied, m->first - copied);
      out += expand_replacement(rep, s.substr(m->first, m->second - m->first));
      copied = m->second;
      if (out.size() > kMaxString) throw_error("RangeError", "string too long");
      if (!r->global()) break;
      from = std::max(m->second, m->first + 1);
    }
    out += s.substr(std::min(copied, s.size()));
    return str(checked(out));
  }

  Value array_method(Array& a, const std::string& name, std::vector<Value>& args) {
    if (name == "push") {
      p_.at(JB::e_arr_push);
      for (auto& v : args) {
        if (a.items.size() >= kMaxArray) throw_error("RangeError", "array too long");
        a.items.push_back(v);
      }
      return num(static_cast<double>(a.items.size()));
    }
    if (name == "pop") {
      p_.at(JB::e_arr_pop);
      if (a.items.empty()) return undef();
      Value v = a.items.back();
      a.items.pop_back();
      return v;
    }
    if (name == "join") {
      p_.at(JB::e_arr_join);
      std::string sep = args.empty() || args[0].t == VT::undef ? "," : to_string(args[0]);
      return str(join_array(a, sep));
    }
    if (name == "indexOf") {
      p_.at(JB::e_arr_index_of);
      Value needle = arg(args, 0);
      for (std::size_t i = 0; i < a.items.size(); ++i) {
        const Value& v = a.items[i];
        bool same = v.t == needle.t &&
                    (v.t == VT::number   ? v.n == needle.n
                     : v.t == VT::string ? v.s == needle.s
                     : v.t == VT::boolean ? v.b == needle.b
                                          : v.p == needle.p);
        if (same) return num(static_cast<double>(i));
      }
      return num(-1);
    }
    if (name == "slice") {
      p_.at(JB::e_arr_slice);
      std::size_t x = clamp_index(args.empty() ? 0 : to_number(args[0]), a.items.size());
      std::size_t y = clamp_index(args.size() > 1 ? to_number(args[1])
                                                  : static_cast<double>(a.items.size()),
                                  a.items.size());
      std::vector<Value> out;
      for (std::size_t i = x; i < y; ++i) out.push_back(a.items[i]);
      return make_array(std::move(out));
    }
    p_.at(JB::e_arr_reverse);
    std::reverse(a.items.begin(), a.items.end());
    Value v;
    v.t = VT::array;
    v.p = &a;
    return v;
  }

  struct Statics {
    std::string input, last_match;
    std::size_t start = 0, end = 0;
    bool has_match = false;
  };

  Probe& p_;
  std::vector<const Array*> joining_;  // arrays being stringified; cycles print as ""
  std::deque<Env> envs_;
  std::deque<Array> arrays_;
  std::deque<Closure> closures_;
  std::deque<RegexObj> regexes_;
  std::deque<Method> methods_;
  Statics statics_;
  std::size_t steps_ = 0;
  int depth_ = 0;
};

}  // namespace

const std::string& minijs_last_output() { return g_output; }

void toy_minijs_target(ByteView input, CoverageSink& cov) {
  g_output.clear();
  Probe p(cov);
  p.at(JB::entry);
  if (input.empty()) {
    p.at(JB::empty_input);
    return;
  }
  try {
    std::deque<Node> arena;
    Lexer lexer(input, p);
    Parser parser(lexer.run(), p, arena);
    Node* program = parser.program();
    Checker(p).run(program);
    Interp(p).run(program);
  } catch (const Stop&) {
  }
}

}  // namespace gramfuzz::targets
