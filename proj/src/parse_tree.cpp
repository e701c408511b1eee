#include "gramfuzz/parse_tree.hpp"

#include <pthread.h>

#include <algorithm>
#include <functional>
#include <system_error>
#include <unordered_map>
#include <unordered_set>

namespace gramfuzz {

std::optional<ParseError> tokenize(const GrammarSpec& g, ByteView input,
                                   TokenStream& out) {
  out.tokens.clear();
  out.trivia.clear();
  std::size_t pos = 0;
  while (pos < input.size()) {
    auto m = g.lexer().longest_match(input, pos);
    if (m.pattern < 0) {
      return ParseError{ParseError::Kind::tokenize, pos,
                        "no token matches at offset " + std::to_string(pos)};
    }
    Token t{static_cast<std::uint32_t>(m.pattern), {pos, pos + m.length}};
    if (g.tokens()[t.kind].skip)
      out.trivia.push_back(t);
    else
      out.tokens.push_back(t);
    pos += m.length;
  }
  return std::nullopt;
}

ParseTree::ParseTree(const GrammarSpec& g, Bytes source, std::vector<Node> nodes,
                     std::vector<std::uint32_t> children)
    : grammar_(&g),
      source_(std::move(source)),
      nodes_(std::move(nodes)),
      children_(std::move(children)) {}

std::optional<std::uint32_t> ParseTree::resolve(
    const std::vector<std::uint32_t>& path) const {
  std::uint32_t cur = 0;
  for (std::uint32_t k : path) {
    if (k >= nodes_[cur].child_count) return std::nullopt;
    cur = child(cur, k);
  }
  return cur;
}

namespace {

constexpr std::size_t kMaxTokens = (1u << 18) - 1;

struct Production {
  std::uint32_t lhs;
  std::vector<Symbol> rhs;
};

struct Item {
  std::uint32_t prod;
  std::uint32_t dot;
  std::uint32_t origin;
};

class Earley {
 public:
  Earley(const GrammarSpec& g, const std::vector<Token>& tokens)
      : g_(g), tokens_(tokens), n_(tokens.size()) {
    rule_prods_.resize(g.rules().size());
    for (std::uint32_t r = 0; r < g.rules().size(); ++r) {
      for (const auto& alt : g.rules()[r].alternatives) {
        rule_prods_[r].push_back(static_cast<std::uint32_t>(prods_.size()));
        prods_.push_back({r, alt});
      }
    }
  }

  static constexpr std::size_t kAccepted = static_cast<std::size_t>(-1);
  static constexpr std::size_t kIncomplete = static_cast<std::size_t>(-2);

  // Returns kAccepted, kIncomplete (all tokens consumed, no full derivation),
  // or the index of the first empty Earley set.
  std::size_t recognize() {
    sets_.resize(n_ + 1);
    seen_.resize(n_ + 1);
    waiting_.resize(n_ + 1);
    for (std::uint32_t p : rule_prods_[g_.start_rule()]) add(0, {p, 0, 0});
    for (std::size_t j = 0; j <= n_; ++j) {
      if (sets_[j].empty()) return j;
      process(j);
    }
    for (const Item& it : sets_[n_]) {
      if (it.origin == 0 && prods_[it.prod].lhs == g_.start_rule() &&
          it.dot == prods_[it.prod].rhs.size())
        return kAccepted;
    }
    return kIncomplete;
  }

  struct TNode {
    Symbol kind;
    std::uint32_t from;
    std::uint32_t to;
    std::vector<std::uint32_t> kids;
  };
  std::vector<TNode> tnodes;

  // Builds the root; returns its tnode index or -1.
  std::int64_t build_root() {
    std::vector<std::uint32_t> kids;
    if (!build_rule(g_.start_rule(), 0, static_cast<std::uint32_t>(n_), kids, true))
      return -1;
    return kids.front();
  }

 private:
  static std::uint64_t item_key(const Item& it) {
    return (static_cast<std::uint64_t>(it.prod) << 40) |
           (static_cast<std::uint64_t>(it.dot) << 32) | it.origin;
  }
  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  void add(std::size_t set, Item it) {
    if (seen_[set].insert(item_key(it)).second) sets_[set].push_back(it);
  }

  void process(std::size_t j) {
    auto& set = sets_[j];
    for (std::size_t k = 0; k < set.size(); ++k) {
      Item it = set[k];
      const Production& p = prods_[it.prod];
      if (it.dot == p.rhs.size()) {
        auto& ends = completed_[pair_key(p.lhs, it.origin)];
        if (ends.empty() || ends.back() != j) ends.push_back(static_cast<std::uint32_t>(j));
        if (it.origin == j) continue;  // nullable: handled at prediction
        const auto& w = waiting_[it.origin];
        auto range = std::equal_range(
            w.begin(), w.end(), std::pair<std::uint32_t, std::uint32_t>{p.lhs, 0},
            [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto i = range.first; i != range.second; ++i) {
          const Item& parent = sets_[it.origin][i->second];
          add(j, {parent.prod, parent.dot + 1, parent.origin});
        }
        continue;
      }
      Symbol next = p.rhs[it.dot];
      if (next.is_token()) {
        if (j < n_ && tokens_[j].kind == next.index)
          add(j + 1, {it.prod, it.dot + 1, it.origin});
        continue;
      }
      for (std::uint32_t q : rule_prods_[next.index]) add(j, {q, 0, static_cast<std::uint32_t>(j)});
      if (g_.nullable(next.index)) add(j, {it.prod, it.dot + 1, it.origin});
    }
    auto& w = waiting_[j];
    for (std::size_t k = 0; k < set.size(); ++k) {
      const Item& it = set[k];
      const Production& p = prods_[it.prod];
      if (it.dot < p.rhs.size() && !p.rhs[it.dot].is_token())
        w.emplace_back(p.rhs[it.dot].index, static_cast<std::uint32_t>(k));
    }
    std::stable_sort(w.begin(), w.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    seen_[j].clear();
  }

  // Candidate ends for `sym` starting at token `from`, longest first.
  void candidates(Symbol sym, std::uint32_t from, std::uint32_t limit,
                  std::vector<std::uint32_t>& out) const {
    out.clear();
    if (sym.is_token()) {
      if (from < n_ && tokens_[from].kind == sym.index && from + 1 <= limit)
        out.push_back(from + 1);
      return;
    }
    auto it = completed_.find(pair_key(sym.index, from));
    if (it == completed_.end()) return;
    for (auto e = it->second.rbegin(); e != it->second.rend(); ++e)
      if (*e <= limit) out.push_back(*e);
  }

  bool can_finish(std::uint32_t prod, std::uint32_t dot, std::uint32_t from,
                  std::uint32_t to) {
    const auto& rhs = prods_[prod].rhs;
    if (dot == rhs.size()) return from == to;
    std::uint64_t key = (static_cast<std::uint64_t>(prod) << 44) |
                        (static_cast<std::uint64_t>(dot) << 36) |
                        (static_cast<std::uint64_t>(from) << 18) | to;
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    std::vector<std::uint32_t> ends;
    candidates(rhs[dot], from, to, ends);
    bool ok = false;
    for (std::uint32_t e : ends) {
      if (can_finish(prod, dot + 1, e, to)) {
        ok = true;
        break;
      }
    }
    memo_.emplace(key, ok);
    return ok;
  }

  bool build_rule(std::uint32_t rule, std::uint32_t from, std::uint32_t to,
                  std::vector<std::uint32_t>& out, bool root = false) {
    std::uint64_t key = (static_cast<std::uint64_t>(rule) << 40) |
                        (static_cast<std::uint64_t>(from) << 20) | to;
    if (!active_.insert(key).second) return false;  // derivation cycle
    bool hidden = g_.rules()[rule].hidden && !root;
    for (std::uint32_t p : rule_prods_[rule]) {
      if (!can_finish(p, 0, from, to)) continue;
      std::vector<std::uint32_t> kids;
      std::size_t mark = tnodes.size();
      if (build_seq(p, 0, from, to, kids)) {
        active_.erase(key);
        if (hidden) {
          out.insert(out.end(), kids.begin(), kids.end());
        } else {
          tnodes.push_back({Symbol{Symbol::Kind::rule, rule}, from, to, std::move(kids)});
          out.push_back(static_cast<std::uint32_t>(tnodes.size() - 1));
        }
        return true;
      }
      tnodes.resize(mark);
    }
    active_.erase(key);
    return false;
  }

  bool build_seq(std::uint32_t prod, std::uint32_t dot, std::uint32_t from,
                 std::uint32_t to, std::vector<std::uint32_t>& kids) {
    const auto& rhs = prods_[prod].rhs;
    if (dot == rhs.size()) return from == to;
    Symbol sym = rhs[dot];
    std::vector<std::uint32_t> ends;
    candidates(sym, from, to, ends);
    for (std::uint32_t e : ends) {
      if (!can_finish(prod, dot + 1, e, to)) continue;
      std::size_t kid_mark = kids.size();
      std::size_t node_mark = tnodes.size();
      bool ok;
      if (sym.is_token()) {
        tnodes.push_back({sym, from, e, {}});
        kids.push_back(static_cast<std::uint32_t>(tnodes.size() - 1));
        ok = true;
      } else {
        ok = build_rule(sym.index, from, e, kids);
      }
      if (ok && build_seq(prod, dot + 1, e, to, kids)) return true;
      kids.resize(kid_mark);
      tnodes.resize(node_mark);
    }
    return false;
  }

  const GrammarSpec& g_;
  const std::vector<Token>& tokens_;
  std::size_t n_;
  std::vector<Production> prods_;
  std::vector<std::vector<std::uint32_t>> rule_prods_;
  std::vector<std::vector<Item>> sets_;
  std::vector<std::unordered_set<std::uint64_t>> seen_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> waiting_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> completed_;
  std::unordered_map<std::uint64_t, bool> memo_;
  std::unordered_set<std::uint64_t> active_;
};

// Tree building recurses once per token along left-recursive repetition.
// Long inputs get a thread whose stack grows with the token count.
constexpr std::size_t kInlineBuildTokens = 512;
constexpr std::size_t kStackPerToken = 16 * 1024;

void run_with_stack(std::size_t stack_bytes, const std::function<void()>& fn) {
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, stack_bytes);
  pthread_t th;
  auto entry = [](void* arg) -> void* {
    (*static_cast<const std::function<void()>*>(arg))();
    return nullptr;
  };
  int rc = pthread_create(&th, &attr, entry, const_cast<std::function<void()>*>(&fn));
  pthread_attr_destroy(&attr);
  if (rc != 0) throw std::system_error(rc, std::generic_category(), "pthread_create");
  pthread_join(th, nullptr);
}

}  // namespace

ParseResult parse(const GrammarSpec& g, ByteView input) {
  ParseResult result;
  TokenStream ts;
  if (auto err = tokenize(g, input, ts)) {
    result.error = *err;
    return result;
  }
  const auto& toks = ts.tokens;
  if (toks.size() > kMaxTokens) {
    result.error = {ParseError::Kind::syntax, 0, "input has too many tokens"};
    return result;
  }

  Earley earley(g, toks);
  std::size_t stop = earley.recognize();
  if (stop != Earley::kAccepted) {
    if (stop == Earley::kIncomplete) {
      result.error = {ParseError::Kind::syntax, input.size(), "unexpected end of input"};
    } else {
      // Set `stop` is empty: token stop-1 could not be consumed.
      const Token& bad = toks[stop - 1];
      result.error = {ParseError::Kind::syntax, bad.span.start,
                      "unexpected token '" + g.tokens()[bad.kind].name + "'"};
    }
    return result;
  }

  std::int64_t root = -1;
  if (toks.size() <= kInlineBuildTokens) {
    root = earley.build_root();
  } else {
    run_with_stack((4u << 20) + toks.size() * kStackPerToken,
                   [&] { root = earley.build_root(); });
  }
  if (root < 0) {
    result.error = {ParseError::Kind::syntax, 0, "no acyclic derivation"};
    return result;
  }

  // Emit the arena in pre-order; spans come from token index ranges.
  const auto& tn = earley.tnodes;
  auto gap_position = [&](std::uint32_t i) -> std::size_t {
    return i == 0 ? 0 : toks[i - 1].span.end;
  };
  std::vector<ParseTree::Node> nodes;
  std::vector<std::uint32_t> children;
  nodes.reserve(tn.size());
  struct Frame {
    std::uint32_t tnode;
    std::size_t slot;  // index in `children` to receive the node id
  };
  constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);
  std::vector<Frame> stack{{static_cast<std::uint32_t>(root), kNoSlot}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const auto& t = tn[f.tnode];
    ParseTree::Node n;
    n.kind = t.kind;
    if (f.slot == kNoSlot)
      n.span = {0, input.size()};
    else if (t.to > t.from)
      n.span = {toks[t.from].span.start, toks[t.to - 1].span.end};
    else
      n.span = {gap_position(t.from), gap_position(t.from)};
    n.first_child = static_cast<std::uint32_t>(children.size());
    n.child_count = static_cast<std::uint32_t>(t.kids.size());
    auto id = static_cast<std::uint32_t>(nodes.size());
    nodes.push_back(n);
    if (f.slot != kNoSlot) children[f.slot] = id;
    std::size_t base = children.size();
    children.resize(base + t.kids.size());
    for (std::size_t k = t.kids.size(); k-- > 0;) stack.push_back({t.kids[k], base + k});
  }

  result.tree.emplace(g, Bytes(input), std::move(nodes), std::move(children));
  return result;
}

Bytes serialize(const ParseTree& t) {
  const Span& s = t.root().span;
  return t.source().substr(s.start, s.size());
}

std::vector<SubtreeRef> enumerate_subtrees(const ParseTree& t, std::size_t max_bytes) {
  std::vector<SubtreeRef> out;
  struct Frame {
    std::uint32_t node;
    std::uint32_t next_child;
  };
  std::vector<Frame> stack{{0, 0}};
  std::vector<std::uint32_t> path;
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& n = t.node(f.node);
    if (f.next_child < n.child_count) {
      std::uint32_t k = f.next_child++;
      std::uint32_t c = t.child(f.node, k);
      const auto& cn = t.node(c);
      if (cn.kind.is_token()) continue;
      path.push_back(k);
      if (!cn.span.empty() && cn.span.size() <= max_bytes) {
        out.push_back({path, cn.span, cn.kind, cn.span.size(), c,
                       static_cast<std::uint32_t>(path.size())});
      }
      stack.push_back({c, 0});
    } else {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
    }
  }
  return out;
}

Bytes excise(ByteView source, Span span) {
  if (span.start > span.end || span.end > source.size())
    throw SpanError("excise: span out of range");
  Bytes out;
  out.reserve(source.size() - span.size());
  out.append(source.substr(0, span.start));
  out.append(source.substr(span.end));
  return out;
}

Bytes splice(ByteView source, Span at, ByteView replacement) {
  if (at.start > at.end || at.end > source.size())
    throw SpanError("splice: span out of range");
  Bytes out;
  out.reserve(source.size() - at.size() + replacement.size());
  out.append(source.substr(0, at.start));
  out.append(replacement);
  out.append(source.substr(at.end));
  return out;
}

}  // namespace gramfuzz
