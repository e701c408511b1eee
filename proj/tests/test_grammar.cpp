#include <algorithm>
#include <functional>

#include "doctest.h"
#include "generator.hpp"
#include "gramfuzz/grammar.hpp"
#include "gramfuzz/parse_tree.hpp"
#include "gramfuzz/token_regex.hpp"
#include "oracles.hpp"

using namespace gramfuzz;
using namespace gramfuzz::testing;

namespace {

const GrammarSpec& minijs() {
  static GrammarSpec g = load_grammar_file(grammar_file("minijs.g"));
  return g;
}
const GrammarSpec& plist() {
  static GrammarSpec g = load_grammar_file(grammar_file("plist-xml.g"));
  return g;
}

std::vector<std::string> leaf_lexemes(const ParseTree& t) {
  std::vector<std::string> out;
  for (std::uint32_t i = 0; i < t.nodes().size(); ++i)
    if (t.is_leaf(i)) out.emplace_back(t.text(i));
  return out;
}

void check_spans(const ParseTree& t, std::uint32_t node) {
  const auto& n = t.node(node);
  std::size_t prev_end = n.span.start;
  for (std::uint32_t k = 0; k < n.child_count; ++k) {
    const auto& c = t.node(t.child(node, k));
    CHECK(c.span.start >= prev_end);
    CHECK(c.span.end <= n.span.end);
    CHECK(c.span.start <= c.span.end);
    // Whatever lies between siblings is trivia only.
    if (c.span.start > prev_end) {
      auto gap = t.source().substr(prev_end, c.span.start - prev_end);
      TokenStream ts;
      REQUIRE_FALSE(tokenize(t.grammar(), gap, ts).has_value());
      CHECK(ts.tokens.empty());
    }
    prev_end = std::max(prev_end, c.span.end);
    check_spans(t, t.child(node, k));
  }
}

}  // namespace

TEST_CASE("regex patterns") {
  auto lit = regex::literal_of(regex::parse("var"));
  REQUIRE(lit);
  CHECK(*lit == "var");
  CHECK_FALSE(regex::literal_of(regex::parse("[0-9]+")));
  CHECK(regex::literal_of(regex::parse("\\+=")).value() == "+=");
  CHECK(regex::matches_empty(regex::parse("a*")));
  CHECK_FALSE(regex::matches_empty(regex::parse("a+")));
  CHECK_THROWS_AS(regex::parse("(ab"), regex::RegexError);
  CHECK_THROWS_AS(regex::parse("[a-"), regex::RegexError);

  auto dfa = regex::Dfa::build({regex::parse("if"), regex::parse("[a-z]+"), regex::parse("[ ]+")});
  auto m = dfa.longest_match("if x", 0);
  CHECK(m.pattern == 0);  // tie on length goes to the earlier pattern
  CHECK(m.length == 2);
  m = dfa.longest_match("iffy", 0);
  CHECK(m.pattern == 1);
  CHECK(m.length == 4);
  CHECK(dfa.longest_match("#", 0).pattern == -1);
}

TEST_CASE("load_grammar: smallest grammar") {
  auto g = load_grammar("start := NUM ; NUM := /[0-9]+/ ; WS skip /[ \\t\\n]+/ ;");
  CHECK(g.named_rule_count() == 1);
  CHECK(g.tokens().size() == 2);
  CHECK(g.symbol_name({Symbol::Kind::rule, g.start_rule()}) == "start");
  auto r = parse(g, " 42\n");
  REQUIRE(r.ok());
  CHECK(serialize(*r.tree) == " 42\n");
}

TEST_CASE("load_grammar: bundled grammars") {
  CHECK(plist().named_rule_count() == 8);
  CHECK(minijs().named_rule_count() == 18);
  CHECK(plist().symbol_name({Symbol::Kind::rule, plist().start_rule()}) == "document");
  CHECK(minijs().symbol_name({Symbol::Kind::rule, minijs().start_rule()}) == "program");
}

TEST_CASE("load_grammar: errors") {
  SUBCASE("undefined symbol is named") {
    try {
      load_grammar("stmt := expr SEMI ;\nSEMI := /;/ ;");
      FAIL("expected GrammarError");
    } catch (const GrammarError& e) {
      CHECK(std::string(e.what()).find("expr") != std::string::npos);
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("duplicate rule") {
    CHECK_THROWS_AS(load_grammar("a := B ;\na := B ;\nB := /b/ ;"), GrammarError);
  }
  SUBCASE("token and rule share a name") {
    CHECK_THROWS_AS(load_grammar("a := B ;\nB := /b/ ;\nB := C ;\nC := /c/ ;"), GrammarError);
  }
  SUBCASE("syntax error reports position") {
    try {
      load_grammar("a := B ;\nB := /b/\n");
      FAIL("expected GrammarError");
    } catch (const GrammarError& e) {
      CHECK(e.line() >= 2);
    }
  }
  SUBCASE("token that matches only the empty string") {
    CHECK_THROWS_AS(load_grammar("a := E ;\nE := /()/ ;"), GrammarError);
  }
  SUBCASE("start directive naming an unknown rule") {
    CHECK_THROWS_AS(load_grammar("start nope ;\na := B ;\nB := /b/ ;"), GrammarError);
  }
  SUBCASE("empty grammar") { CHECK_THROWS_AS(load_grammar("# nothing\n"), GrammarError); }
}

TEST_CASE("load_grammar: start directive and comments") {
  auto g = load_grammar("# c\nstart b ;\na := X ;\nb := a a ;\nX := /x/ ;\n");
  CHECK(g.symbol_name({Symbol::Kind::rule, g.start_rule()}) == "b");
  CHECK(parse(g, "xx").ok());
  CHECK_FALSE(parse(g, "x").ok());
}

TEST_CASE("parse: var x=1;") {
  auto r = parse(minijs(), "var x=1;");
  REQUIRE(r.ok());
  const ParseTree& t = *r.tree;
  CHECK(t.kind_name(0) == "program");
  CHECK(leaf_lexemes(t) == std::vector<std::string>{"var", "x", "=", "1", ";"});
  CHECK(serialize(t) == "var x=1;");
}

TEST_CASE("parse: failures") {
  SUBCASE("trimmed XML header is not a document") {
    auto in = read_file(fixture("trim/header_mangled.plist"));
    auto r = parse(plist(), in);
    CHECK_FALSE(r.ok());
    CHECK(parse(plist(), read_file(fixture("trim/header_original.plist"))).ok());
  }
  SUBCASE("empty input") {
    CHECK_FALSE(parse(plist(), "").ok());
    CHECK(parse(minijs(), "").ok());  // program := statement*
  }
  SUBCASE("tokenize error offset") {
    auto r = parse(minijs(), "var x = 1; @");
    REQUIRE_FALSE(r.ok());
    CHECK(r.error.kind == ParseError::Kind::tokenize);
    CHECK(r.error.offset == 11);
  }
  SUBCASE("syntax error offset") {
    auto r = parse(minijs(), "var x=;");
    REQUIRE_FALSE(r.ok());
    CHECK(r.error.kind == ParseError::Kind::syntax);
    CHECK(r.error.offset == 6);
  }
  SUBCASE("binary garbage") {
    Bytes junk("\x00\xff\x10<", 4);
    CHECK_FALSE(parse(plist(), junk).ok());
  }
}

TEST_CASE("parse: long inputs do not exhaust the stack") {
  Bytes in;
  for (int i = 0; i < 20000; ++i) in += "x;";
  in = "var x = 0;" + in;
  auto r = parse(minijs(), in);
  REQUIRE(r.ok());
  CHECK(serialize(*r.tree) == in);
}

TEST_CASE("serialize: single token") {
  auto g = load_grammar("s := N ; N := /[0-9]+/ ;");
  auto r = parse(g, "7");
  REQUIRE(r.ok());
  CHECK(serialize(*r.tree) == "7");
  CHECK(enumerate_subtrees(*r.tree).empty());
}

TEST_CASE("round trip, span partition and determinism on generated inputs") {
  for (const GrammarSpec* g : {&minijs(), &plist()}) {
    InputGenerator gen(*g, 11);
    auto inputs = gen.generate(60, 3000);
    REQUIRE(inputs.size() == 60);
    for (const auto& in : inputs) {
      auto a = parse(*g, in);
      REQUIRE(a.ok());
      CHECK(serialize(*a.tree) == in);
      check_spans(*a.tree, 0);
      for (std::uint32_t i = 0; i < a.tree->nodes().size(); ++i)
        if (a.tree->is_leaf(i)) CHECK(a.tree->text(i).size() > 0);
      auto b = parse(*g, in);
      REQUIRE(b.ok());
      REQUIRE(a.tree->nodes().size() == b.tree->nodes().size());
      for (std::uint32_t i = 0; i < a.tree->nodes().size(); ++i) {
        CHECK(a.tree->node(i).kind == b.tree->node(i).kind);
        CHECK(a.tree->node(i).span == b.tree->node(i).span);
      }
    }
  }
}

TEST_CASE("enumerate_subtrees") {
  SUBCASE("var x=1; has statement, varDecl, expr") {
    auto r = parse(minijs(), "var x=1;");
    REQUIRE(r.ok());
    auto subs = enumerate_subtrees(*r.tree);
    REQUIRE(subs.size() == 3);
    CHECK(r.tree->kind_name(subs[0].node) == "statement");
    CHECK(r.tree->kind_name(subs[1].node) == "varDecl");
    CHECK(r.tree->kind_name(subs[2].node) == "expr");
    CHECK(subs[2].span == Span{6, 7});
    CHECK(subs.size() == count_subtrees_recursive(*r.tree));
  }
  SUBCASE("refs resolve and agree with a recursive count") {
    InputGenerator gen(minijs(), 5, {6, 60, 0});
    for (const auto& in : gen.generate(80, 2000)) {
      auto r = parse(minijs(), in);
      REQUIRE(r.ok());
      if (r.tree->nodes().size() > 50) continue;
      auto subs = enumerate_subtrees(*r.tree);
      CHECK(subs.size() == count_subtrees_recursive(*r.tree));
      for (const auto& s : subs) {
        auto n = r.tree->resolve(s.path);
        REQUIRE(n);
        CHECK(*n == s.node);
        CHECK(r.tree->node(*n).span == s.span);
        CHECK(s.size_bytes == s.span.size());
        CHECK_FALSE(s.kind.is_token());
      }
    }
  }
  SUBCASE("max_bytes") {
    Bytes in = "var s = \"" + Bytes(300, 'a') + "\"; var t = 1;";
    auto r = parse(minijs(), in);
    REQUIRE(r.ok());
    auto all = enumerate_subtrees(*r.tree);
    auto small = enumerate_subtrees(*r.tree, 200);
    CHECK(small.size() < all.size());
    for (const auto& s : small) CHECK(s.size_bytes <= 200);
    CHECK(small.size() == count_subtrees_recursive(*r.tree, 0, true, 200));
  }
}

TEST_CASE("excise and splice") {
  CHECK(excise("abcdef", Span{2, 4}) == "abef");
  CHECK(excise("abcdef", Span{0, 0}) == "abcdef");
  CHECK(splice("a+b", Span{2, 3}, "c*d") == "a+c*d");
  CHECK(splice("abc", Span{1, 2}, "b") == "abc");
  CHECK_THROWS_AS(excise("abc", Span{2, 5}), SpanError);
  CHECK_THROWS_AS(splice("abc", Span{3, 2}, "x"), SpanError);

  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    Bytes s(rng.below(40), 'x');
    for (auto& c : s) c = static_cast<char>('a' + rng.below(26));
    std::size_t a = rng.below(s.size() + 1), b = rng.below(s.size() + 1);
    if (a > b) std::swap(a, b);
    Bytes rep(rng.below(5), 'Z');
    Bytes naive_ex = s;
    naive_ex.erase(a, b - a);
    CHECK(excise(s, Span{a, b}) == naive_ex);
    Bytes naive_sp = s;
    naive_sp.replace(a, b - a, rep);
    CHECK(splice(s, Span{a, b}, rep) == naive_sp);
  }
}

TEST_CASE("excise a whole try-catch statement") {
  Bytes in = read_file(fixture("trim/redundant_try_catch.js"));
  auto r = parse(minijs(), in);
  REQUIRE(r.ok());
  const Bytes stmt = "try { throw \"{}\"; } catch (ex) {}";
  std::size_t at = in.find(stmt);
  REQUIRE(at != Bytes::npos);
  auto subs = enumerate_subtrees(*r.tree);
  auto it = std::find_if(subs.begin(), subs.end(), [&](const SubtreeRef& s) {
    return s.span == Span{at, at + stmt.size()} && r.tree->kind_name(s.node) == "statement";
  });
  REQUIRE(it != subs.end());
  Bytes expected = in;
  expected.erase(at, stmt.size());
  CHECK(excise(in, *it) == expected);
  CHECK(parse(minijs(), expected).ok());
}

TEST_CASE("splice x + 2 with Number(x)") {
  Bytes in = "var x = \"5\";\nvar y = x + 2;\n";
  auto r = parse(minijs(), in);
  REQUIRE(r.ok());
  auto subs = enumerate_subtrees(*r.tree);
  std::size_t at = in.find("x + 2");
  auto it = std::find_if(subs.begin(), subs.end(),
                         [&](const SubtreeRef& s) { return s.span == Span{at, at + 5}; });
  REQUIRE(it != subs.end());
  CHECK(r.tree->kind_name(it->node) == "expr");
  Bytes out = splice(in, *it, "Number(x)");
  CHECK(out == "var x = \"5\";\nvar y = Number(x);\n");
  CHECK(parse(minijs(), out).ok());
}

TEST_CASE("comments are trivia") {
  Bytes in = "var a = 1; // one\n/* two */ var b = a;";
  auto r = parse(minijs(), in);
  REQUIRE(r.ok());
  for (const auto& l : leaf_lexemes(*r.tree)) CHECK(l.find("//") == std::string::npos);
  TokenStream ts;
  REQUIRE_FALSE(tokenize(minijs(), in, ts));
  std::size_t comments = 0;
  for (const auto& t : ts.trivia) comments += minijs().is_comment_token(t.kind);
  CHECK(comments == 2);
}
