#include <set>
#include <stdexcept>

#include "doctest.h"
#include "generator.hpp"
#include "gramfuzz/harness.hpp"
#include "gramfuzz/parse_tree.hpp"
#include "gramfuzz/trim.hpp"
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

TrimOracle target_oracle(Executor& ex) {
  return [&ex](ByteView in) {
    auto r = ex.run_compact(in);
    if (r.status != ExecStatus::ok) return CoverageSignature{~r.signature.digest};
    return r.signature;
  };
}

TargetSpec direct(const std::string& name) {
  auto t = *builtin_target(name);
  t.isolation = Isolation::direct;
  return t;
}

CoverageSignature digest_of(std::uint64_t v) { return {v}; }

std::vector<std::size_t> chunk_sizes_for(std::size_t len) {
  std::vector<std::size_t> out;
  for (std::size_t n = 16; n <= 1024; n *= 2)
    if (len / n >= 4) out.push_back(len / n);
  return out;
}

}  // namespace

TEST_CASE("builtin_trim: chunk schedule") {
  for (std::size_t len : {1u, 3u, 63u, 64u, 100u, 1000u, 4096u, 5000u}) {
    Bytes in(len, 'a');
    for (std::size_t i = 0; i < len; ++i) in[i] = static_cast<char>('a' + i % 26);
    std::vector<std::pair<std::size_t, std::size_t>> attempts;  // (n, chunk)
    TrimOptions opt;
    opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature) {
      attempts.emplace_back(a.n, a.removed.size());
    };
    auto out = builtin_trim(in, [&](ByteView c) { return digest_of(c.size()); }, digest_of(len), opt);
    CHECK(out.trimmed == in);
    CHECK(out.bytes_removed == 0);
    CHECK(out.mode == TrimMode::builtin);

    for (auto [n, chunk] : attempts) CHECK(chunk >= kTrimMinChunk);
    // Every pass uses len/n; passes stop once len/n drops below 4.
    std::vector<std::size_t> passes;
    std::size_t last_n = 0;
    for (auto [n, chunk] : attempts) {
      if (n != last_n) {
        CHECK(chunk == len / n);
        passes.push_back(chunk);
        last_n = n;
      }
    }
    CHECK(passes == chunk_sizes_for(len));
    CHECK(out.executions_used == attempts.size());
  }
}

TEST_CASE("builtin_trim: 64 bytes, first pass chunk 4") {
  Bytes in(64, 'x');
  std::vector<TrimAttempt> attempts;
  TrimOptions opt;
  opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature) { attempts.push_back(a); };
  builtin_trim(in, [](ByteView c) { return digest_of(c.size()); }, digest_of(64), opt);
  REQUIRE(attempts.size() == 16);
  CHECK(attempts.front().n == 16);
  CHECK(attempts.front().removed == Span{0, 4});
  CHECK(attempts.back().removed == Span{60, 64});
}

TEST_CASE("builtin_trim: chunk size follows the current length") {
  // Accept the very first removal only; later passes see the shorter input.
  Bytes in(1024, 'z');
  int calls = 0;
  std::vector<TrimAttempt> attempts;
  TrimOptions opt;
  opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature) { attempts.push_back(a); };
  auto out = builtin_trim(
      in, [&](ByteView) { return digest_of(++calls == 1 ? 7 : 8); }, digest_of(7), opt);
  CHECK(out.bytes_removed == 64);
  std::size_t cur = 1024 - 64;
  for (const auto& a : attempts)
    if (a.n == 32) CHECK(a.removed.size() == std::min<std::size_t>(cur / 32, cur - a.removed.start));
  CHECK(out.trimmed.size() == cur);
}

TEST_CASE("builtin_trim: removals keep the signature") {
  // Signature = set of distinct bytes; repeated filler can go.
  Bytes in = "HEAD" + Bytes(200, '.') + "BODY" + Bytes(100, '-') + "TAIL";
  auto oracle = [](ByteView c) {
    std::set<char> s(c.begin(), c.end());
    std::uint64_t h = 0;
    for (char ch : s) h = h * 131 + static_cast<unsigned char>(ch);
    return digest_of(h);
  };
  auto base = oracle(in);
  TrimOptions opt;
  opt.on_attempt = [&](const TrimAttempt& a, ByteView cand, CoverageSignature sig) {
    if (a.accepted) CHECK(oracle(cand) == base);
    CHECK(sig == oracle(cand));
  };
  auto out = builtin_trim(in, oracle, base, opt);
  CHECK(out.bytes_removed > 200);
  CHECK(oracle(out.trimmed) == base);
  CHECK(out.bytes_removed == in.size() - out.trimmed.size());
}

TEST_CASE("builtin_trim: lenient oracle may break the syntax") {
  Bytes in = read_file(fixture("trim/header_original.plist"));
  Bytes shown = read_file(fixture("trim/header_mangled.plist"));
  // Only the opening tags of the values matter to this oracle.
  auto lenient = [](ByteView c) {
    std::uint64_t h = 1;
    for (const char* tag : {"<dict>", "<key>", "<string>", "<data>"})
      h = h * 3 + (c.find(tag) != ByteView::npos);
    return digest_of(h);
  };
  CHECK(lenient(shown) == lenient(in));
  CHECK_FALSE(parse(plist(), shown).ok());

  auto out = builtin_trim(in, lenient);
  CHECK(out.bytes_removed > 0);
  CHECK(lenient(out.trimmed) == lenient(in));
  CHECK_FALSE(parse(plist(), out.trimmed).ok());
}

TEST_CASE("builtin_trim: oracle failure returns the original") {
  Bytes in(256, 'q');
  int calls = 0;
  auto out = builtin_trim(
      in,
      [&](ByteView) -> CoverageSignature {
        if (++calls == 3) throw std::runtime_error("target vanished");
        return digest_of(1);
      },
      digest_of(1));
  CHECK(out.error.has_value());
  CHECK(out.trimmed == in);
  CHECK(out.bytes_removed == 0);
}

TEST_CASE("tree_trim: redundant try-catch is removed whole") {
  Executor ex(direct("minijs"));
  Bytes in = read_file(fixture("trim/redundant_try_catch.js"));
  std::vector<TrimAttempt> accepted;
  TrimOptions opt;
  opt.on_attempt = [&](const TrimAttempt& a, ByteView, CoverageSignature) {
    if (a.accepted) accepted.push_back(a);
  };
  auto oracle = target_oracle(ex);
  auto out = tree_trim(in, minijs(), oracle, oracle(in), opt);
  CHECK(out.mode == TrimMode::tree);
  CHECK(out.still_parses);
  REQUIRE(accepted.size() == 1);
  const Bytes stmt = "try { throw \"{}\"; } catch (ex) {}";
  CHECK(in.substr(accepted[0].removed.start, accepted[0].removed.size()) == stmt);
  Bytes expected = in;
  expected.erase(in.find(stmt), stmt.size());
  CHECK(out.trimmed == expected);
  CHECK(oracle(out.trimmed) == oracle(in));
}

TEST_CASE("tree_trim: unparsable input falls back to builtin") {
  Executor ex(direct("minijs"));
  auto oracle = target_oracle(ex);
  Bytes in = "var x=; var y = 1; print(y); print(y); print(y); var z = 2;";
  auto a = tree_trim(in, minijs(), oracle);
  auto b = builtin_trim(in, oracle);
  CHECK(a.mode == TrimMode::builtin_fallback);
  CHECK(a.trimmed == b.trimmed);
  CHECK(a.executions_used == b.executions_used);
  CHECK(a.still_parses == parse(minijs(), a.trimmed).ok());
}

TEST_CASE("tree_trim: every subtree relevant") {
  auto g = load_grammar("s := x* ;\nx := A | B | C ;\nA := /a/ ; B := /b/ ; C := /c/ ;\nWS skip / +/ ;");
  Bytes in = "a b c";
  auto oracle = [](ByteView c) {
    std::uint64_t h = 0;
    for (char ch : {'a', 'b', 'c'}) h = h * 2 + (c.find(ch) != ByteView::npos);
    return digest_of(h);
  };
  auto r = parse(g, in);
  REQUIRE(r.ok());
  auto out = tree_trim(in, g, oracle);
  CHECK(out.trimmed == in);
  CHECK(out.bytes_removed == 0);
  CHECK(out.executions_used == enumerate_subtrees(*r.tree).size());
  CHECK(out.executions_used == 3);
}

TEST_CASE("tree_trim: oracle failure keeps the best result") {
  auto g = load_grammar("s := x* ;\nx := A | B ;\nA := /a/ ; B := /b/ ;\nWS skip / +/ ;");
  int calls = 0;
  auto out = tree_trim("a a b", g, [&](ByteView c) -> CoverageSignature {
    if (++calls == 3) throw std::runtime_error("boom");
    return digest_of(c.find('b') != ByteView::npos);
  }, digest_of(1));
  CHECK(out.error.has_value());
  CHECK(out.mode == TrimMode::tree);
  CHECK(parse(g, out.trimmed).ok());
  CHECK(out.trimmed.size() < 5);
}

TEST_CASE("tree_trim on generated inputs: validity, signatures, bounds, fixpoint") {
  struct Case {
    const GrammarSpec* g;
    const char* target;
  };
  for (Case c : {Case{&minijs(), "minijs"}, Case{&plist(), "xml"}}) {
    Executor ex(direct(c.target));
    auto oracle = target_oracle(ex);
    InputGenerator gen(*c.g, 21, {7, 150, 10});
    for (const auto& in : gen.generate(25, 2000)) {
      auto base = oracle(in);
      std::size_t bound = 0;
      {
        auto r = parse(*c.g, in);
        REQUIRE(r.ok());
        bound += enumerate_subtrees(*r.tree).size();
      }
      TrimOptions opt;
      opt.on_attempt = [&](const TrimAttempt& a, ByteView cand, CoverageSignature sig) {
        if (!a.accepted) return;
        CHECK(sig == base);
        CHECK(oracle(cand) == base);
        auto r = parse(*c.g, cand);
        REQUIRE(r.ok());
        bound += enumerate_subtrees(*r.tree).size();
      };
      auto out = tree_trim(in, *c.g, oracle, base, opt);
      REQUIRE(out.mode == TrimMode::tree);
      CHECK(out.still_parses);
      CHECK(parse(*c.g, out.trimmed).ok());
      CHECK(oracle(out.trimmed) == base);
      CHECK(out.bytes_removed == in.size() - out.trimmed.size());
      CHECK(out.executions_used <= bound);

      auto again = tree_trim(out.trimmed, *c.g, oracle);
      CHECK(again.bytes_removed == 0);
    }
  }
}
