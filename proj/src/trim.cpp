#include "gramfuzz/trim.hpp"

#include <algorithm>
#include <exception>

#include "gramfuzz/parse_tree.hpp"

namespace gramfuzz {

const char* to_string(TrimMode m) {
  switch (m) {
    case TrimMode::tree: return "tree";
    case TrimMode::builtin: return "builtin";
    case TrimMode::builtin_fallback: return "builtin_fallback";
  }
  return "?";
}

TrimOutcome builtin_trim(ByteView input, const TrimOracle& oracle,
                         CoverageSignature original, const TrimOptions& opt) {
  TrimOutcome out;
  out.mode = TrimMode::builtin;
  Bytes cur(input);
  try {
    for (std::size_t n = kTrimFirstDivisor; n <= kTrimLastDivisor; n *= 2) {
      std::size_t chunk = cur.size() / n;
      if (chunk < kTrimMinChunk) break;
      std::size_t pos = 0;
      while (pos < cur.size()) {
        std::size_t len = std::min(chunk, cur.size() - pos);
        if (len < kTrimMinChunk || len == cur.size()) break;
        Span removed{pos, pos + len};
        Bytes cand = excise(cur, removed);
        CoverageSignature sig = oracle(cand);
        ++out.executions_used;
        bool keep = sig == original;
        if (opt.on_attempt) opt.on_attempt({TrimMode::builtin, n, removed, keep}, cand, sig);
        if (keep)
          cur = std::move(cand);
        else
          pos += len;
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
    cur.assign(input);
  }
  out.bytes_removed = input.size() - cur.size();
  out.trimmed = std::move(cur);
  return out;
}

TrimOutcome builtin_trim(ByteView input, const TrimOracle& oracle) {
  return builtin_trim(input, oracle, oracle(input));
}

namespace {

std::vector<SubtreeRef> trim_order(const ParseTree& t) {
  auto subs = enumerate_subtrees(t);
  std::stable_sort(subs.begin(), subs.end(), [](const SubtreeRef& a, const SubtreeRef& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.size_bytes > b.size_bytes;
  });
  return subs;
}

}  // namespace

TrimOutcome tree_trim(ByteView input, const GrammarSpec& g, const TrimOracle& oracle,
                      CoverageSignature original, const TrimOptions& opt) {
  ParseResult pr = parse(g, input);
  if (!pr) {
    TrimOutcome out = builtin_trim(input, oracle, original, opt);
    out.mode = TrimMode::builtin_fallback;
    out.still_parses = parse(g, out.trimmed).ok();
    return out;
  }
  TrimOutcome out;
  out.mode = TrimMode::tree;
  Bytes cur(input);
  ParseTree tree = std::move(*pr.tree);
  try {
    bool progress = true;
    while (progress) {
      progress = false;
      for (const SubtreeRef& n : trim_order(tree)) {
        Bytes cand = excise(cur, n);
        ParseResult reparsed = parse(g, cand);
        if (!reparsed) continue;
        CoverageSignature sig = oracle(cand);
        ++out.executions_used;
        bool keep = sig == original;
        if (opt.on_attempt) opt.on_attempt({TrimMode::tree, 0, n.span, keep}, cand, sig);
        if (keep) {
          cur = std::move(cand);
          tree = std::move(*reparsed.tree);
          progress = true;
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.bytes_removed = input.size() - cur.size();
  out.trimmed = std::move(cur);
  out.still_parses = true;
  return out;
}

TrimOutcome tree_trim(ByteView input, const GrammarSpec& g, const TrimOracle& oracle) {
  return tree_trim(input, g, oracle, oracle(input));
}

}  // namespace gramfuzz
