#include "gramfuzz/token_regex.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace gramfuzz::regex {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view p) : p_(p) {}

  Node run() {
    Node n = alternation();
    if (pos_ != p_.size()) fail("unexpected ')'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw RegexError(pos_, "regex: " + msg + " at offset " +
                               std::to_string(pos_));
  }
  bool at_end() const { return pos_ >= p_.size(); }
  char peek() const { return p_[pos_]; }

  Node alternation() {
    Node first = concatenation();
    if (at_end() || peek() != '|') return first;
    Node alt;
    alt.kind = Node::Kind::alt;
    alt.kids.push_back(std::move(first));
    while (!at_end() && peek() == '|') {
      ++pos_;
      alt.kids.push_back(concatenation());
    }
    return alt;
  }

  Node concatenation() {
    Node cat;
    cat.kind = Node::Kind::concat;
    while (!at_end() && peek() != '|' && peek() != ')') {
      cat.kids.push_back(postfix());
    }
    if (cat.kids.empty()) return Node{};
    if (cat.kids.size() == 1) return std::move(cat.kids.front());
    return cat;
  }

  Node postfix() {
    Node atom_node = atom();
    while (!at_end()) {
      Node::Kind k;
      switch (peek()) {
        case '*': k = Node::Kind::star; break;
        case '+': k = Node::Kind::plus; break;
        case '?': k = Node::Kind::opt; break;
        default: return atom_node;
      }
      ++pos_;
      Node wrap;
      wrap.kind = k;
      wrap.kids.push_back(std::move(atom_node));
      atom_node = std::move(wrap);
    }
    return atom_node;
  }

  static Node set_node(const ByteSet& s) {
    Node n;
    n.kind = Node::Kind::set;
    n.bytes = s;
    return n;
  }

  Node atom() {
    char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        Node inner = alternation();
        if (at_end() || peek() != ')') fail("missing ')'");
        ++pos_;
        return inner;
      }
      case '[':
        return set_node(char_class());
      case '.': {
        ++pos_;
        ByteSet s;
        s.set();
        s.reset('\n');
        return set_node(s);
      }
      case '*':
      case '+':
      case '?':
        fail("dangling postfix operator");
      case '\\': {
        ++pos_;
        return set_node(escape());
      }
      default: {
        ++pos_;
        ByteSet s;
        s.set(static_cast<unsigned char>(c));
        return set_node(s);
      }
    }
  }

  static int hex_value(char h) {
    if (h >= '0' && h <= '9') return h - '0';
    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
    return -1;
  }

  // Called with pos_ just past the backslash.
  ByteSet escape() {
    if (at_end()) fail("trailing backslash");
    char c = p_[pos_++];
    ByteSet s;
    auto range = [&s](int lo, int hi) {
      for (int b = lo; b <= hi; ++b) s.set(static_cast<std::size_t>(b));
    };
    switch (c) {
      case 'n': s.set('\n'); break;
      case 't': s.set('\t'); break;
      case 'r': s.set('\r'); break;
      case 'f': s.set('\f'); break;
      case 'v': s.set('\v'); break;
      case '0': s.set(0); break;
      case 'd': range('0', '9'); break;
      case 'w':
        range('0', '9');
        range('a', 'z');
        range('A', 'Z');
        s.set('_');
        break;
      case 's':
        for (char w : std::string_view(" \t\r\n\f\v")) s.set(static_cast<unsigned char>(w));
        break;
      case 'x': {
        if (pos_ + 2 > p_.size()) fail("short \\x escape");
        int hi = hex_value(p_[pos_]);
        int lo = hex_value(p_[pos_ + 1]);
        if (hi < 0 || lo < 0) fail("bad \\x escape");
        pos_ += 2;
        s.set(static_cast<std::size_t>(hi * 16 + lo));
        break;
      }
      default:
        s.set(static_cast<unsigned char>(c));
    }
    return s;
  }

  ByteSet char_class() {
    ++pos_;  // '['
    bool negate = false;
    if (!at_end() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    ByteSet s;
    bool first = true;
    while (true) {
      if (at_end()) fail("unterminated character class");
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      ByteSet item;
      int lo = -1;
      if (c == '\\') {
        ++pos_;
        item = escape();
        if (item.count() == 1) {
          for (int b = 0; b < 256; ++b)
            if (item.test(static_cast<std::size_t>(b))) lo = b;
        }
      } else {
        ++pos_;
        lo = static_cast<unsigned char>(c);
        item.set(static_cast<std::size_t>(lo));
      }
      if (lo >= 0 && pos_ + 1 < p_.size() && peek() == '-' &&
          p_[pos_ + 1] != ']') {
        ++pos_;
        int hi;
        if (peek() == '\\') {
          ++pos_;
          ByteSet h = escape();
          if (h.count() != 1) fail("class range bound must be one byte");
          hi = 0;
          for (int b = 0; b < 256; ++b)
            if (h.test(static_cast<std::size_t>(b))) hi = b;
        } else {
          hi = static_cast<unsigned char>(peek());
          ++pos_;
        }
        if (hi < lo) fail("reversed class range");
        for (int b = lo; b <= hi; ++b) item.set(static_cast<std::size_t>(b));
      }
      s |= item;
    }
    if (negate) s.flip();
    return s;
  }

  std::string_view p_;
  std::size_t pos_ = 0;
};

// Thompson NFA.
struct Nfa {
  struct State {
    std::vector<int> eps;
    ByteSet on;
    int to = -1;  // target of the byte transition
    int accept = -1;
  };
  std::vector<State> states;

  int add() {
    states.emplace_back();
    return static_cast<int>(states.size()) - 1;
  }

  // Returns {entry, exit}; exit has no outgoing edges yet.
  std::pair<int, int> build(const Node& n) {
    using K = Node::Kind;
    switch (n.kind) {
      case K::empty: {
        int s = add();
        return {s, s};
      }
      case K::set: {
        int a = add();
        int b = add();
        states[a].on = n.bytes;
        states[a].to = b;
        return {a, b};
      }
      case K::concat: {
        auto [in, out] = build(n.kids.front());
        for (std::size_t i = 1; i < n.kids.size(); ++i) {
          auto [i2, o2] = build(n.kids[i]);
          states[out].eps.push_back(i2);
          out = o2;
        }
        return {in, out};
      }
      case K::alt: {
        int in = add();
        int out = add();
        for (const Node& k : n.kids) {
          auto [i2, o2] = build(k);
          states[in].eps.push_back(i2);
          states[o2].eps.push_back(out);
        }
        return {in, out};
      }
      case K::star:
      case K::plus:
      case K::opt: {
        int in = add();
        int out = add();
        auto [i2, o2] = build(n.kids.front());
        states[in].eps.push_back(i2);
        states[o2].eps.push_back(out);
        if (n.kind != K::plus) states[in].eps.push_back(out);
        if (n.kind != K::opt) states[o2].eps.push_back(i2);
        return {in, out};
      }
    }
    return {add(), add()};
  }

  void closure(std::vector<int>& set) const {
    std::vector<char> seen(states.size(), 0);
    std::vector<int> stack(set.begin(), set.end());
    for (int s : set) seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (int t : states[static_cast<std::size_t>(s)].eps) {
        if (!seen[static_cast<std::size_t>(t)]) {
          seen[static_cast<std::size_t>(t)] = 1;
          set.push_back(t);
          stack.push_back(t);
        }
      }
    }
    std::sort(set.begin(), set.end());
  }
};

void collect_sets(const Node& n, std::vector<ByteSet>& out) {
  if (n.kind == Node::Kind::set) out.push_back(n.bytes);
  for (const Node& k : n.kids) collect_sets(k, out);
}

}  // namespace

Node parse(std::string_view pattern) { return Parser(pattern).run(); }

std::optional<std::string> literal_of(const Node& node) {
  using K = Node::Kind;
  switch (node.kind) {
    case K::empty:
      return std::string{};
    case K::set: {
      if (node.bytes.count() != 1) return std::nullopt;
      for (int b = 0; b < 256; ++b)
        if (node.bytes.test(static_cast<std::size_t>(b)))
          return std::string(1, static_cast<char>(b));
      return std::nullopt;
    }
    case K::concat: {
      std::string out;
      for (const Node& k : node.kids) {
        auto part = literal_of(k);
        if (!part) return std::nullopt;
        out += *part;
      }
      return out;
    }
    case K::alt:
      if (node.kids.size() == 1) return literal_of(node.kids.front());
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

bool matches_empty(const Node& node) {
  using K = Node::Kind;
  switch (node.kind) {
    case K::empty:
    case K::star:
    case K::opt:
      return true;
    case K::set:
      return false;
    case K::plus:
      return matches_empty(node.kids.front());
    case K::concat:
      return std::all_of(node.kids.begin(), node.kids.end(), matches_empty);
    case K::alt:
      return std::any_of(node.kids.begin(), node.kids.end(), matches_empty);
  }
  return false;
}

Dfa Dfa::build(const std::vector<Node>& patterns, std::size_t max_states) {
  Nfa nfa;
  int root = nfa.add();
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    auto [in, out] = nfa.build(patterns[i]);
    nfa.states[static_cast<std::size_t>(root)].eps.push_back(in);
    nfa.states[static_cast<std::size_t>(out)].accept = static_cast<int>(i);
  }

  Dfa dfa;

  // Partition bytes into classes that no set distinguishes.
  std::vector<ByteSet> sets;
  for (const Node& p : patterns) collect_sets(p, sets);
  {
    std::map<std::vector<bool>, std::uint16_t> signature_to_class;
    for (int b = 0; b < 256; ++b) {
      std::vector<bool> sig(sets.size());
      for (std::size_t i = 0; i < sets.size(); ++i)
        sig[i] = sets[i].test(static_cast<std::size_t>(b));
      auto [it, inserted] = signature_to_class.try_emplace(
          sig, static_cast<std::uint16_t>(signature_to_class.size()));
      dfa.byte_class_[static_cast<std::size_t>(b)] = it->second;
    }
    dfa.num_classes_ = signature_to_class.size();
  }
  std::vector<int> representative(dfa.num_classes_, -1);
  for (int b = 0; b < 256; ++b) {
    auto& r = representative[dfa.byte_class_[static_cast<std::size_t>(b)]];
    if (r < 0) r = b;
  }

  std::map<std::vector<int>, std::int32_t> index;
  std::vector<std::vector<int>> pending;

  auto intern = [&](std::vector<int> set) -> std::int32_t {
    nfa.closure(set);
    if (set.empty()) return kDead;
    auto it = index.find(set);
    if (it != index.end()) return it->second;
    if (index.size() >= max_states)
      throw RegexError(0, "token automaton exceeds state limit");
    auto id = static_cast<std::int32_t>(index.size());
    index.emplace(set, id);
    std::vector<std::int32_t> accepts;
    for (int s : set) {
      int a = nfa.states[static_cast<std::size_t>(s)].accept;
      if (a >= 0) accepts.push_back(a);
    }
    std::sort(accepts.begin(), accepts.end());
    dfa.accept_.push_back(accepts.empty() ? -1 : accepts.front());
    dfa.all_accepts_.push_back(std::move(accepts));
    pending.push_back(std::move(set));
    return id;
  };

  intern({root});
  for (std::size_t cur = 0; cur < pending.size(); ++cur) {
    dfa.next_.resize((cur + 1) * dfa.num_classes_, kDead);
    for (std::size_t cls = 0; cls < dfa.num_classes_; ++cls) {
      auto byte = static_cast<std::size_t>(representative[cls]);
      std::vector<int> moved;
      for (int s : pending[cur]) {
        const auto& st = nfa.states[static_cast<std::size_t>(s)];
        if (st.to >= 0 && st.on.test(byte)) moved.push_back(st.to);
      }
      std::sort(moved.begin(), moved.end());
      moved.erase(std::unique(moved.begin(), moved.end()), moved.end());
      std::int32_t target = moved.empty() ? kDead : intern(std::move(moved));
      dfa.next_[cur * dfa.num_classes_ + cls] = target;
    }
  }
  return dfa;
}

Dfa::Match Dfa::longest_match(std::string_view input, std::size_t from) const {
  Match best;
  std::int32_t state = start();
  for (std::size_t i = from; i < input.size(); ++i) {
    state = step(state, static_cast<unsigned char>(input[i]));
    if (state == kDead) break;
    std::int32_t a = accept(state);
    if (a >= 0) {
      best.pattern = a;
      best.length = i + 1 - from;
    }
  }
  return best;
}

bool Dfa::accepts_nonempty(std::int32_t index) const {
  std::vector<char> seen(state_count(), 0);
  std::queue<std::int32_t> work;
  for (std::size_t cls = 0; cls < num_classes_; ++cls) {
    std::int32_t t = next_[cls];
    if (t != kDead && !seen[static_cast<std::size_t>(t)]) {
      seen[static_cast<std::size_t>(t)] = 1;
      work.push(t);
    }
  }
  while (!work.empty()) {
    std::int32_t s = work.front();
    work.pop();
    const auto& acc = all_accepts_[static_cast<std::size_t>(s)];
    if (std::find(acc.begin(), acc.end(), index) != acc.end()) return true;
    for (std::size_t cls = 0; cls < num_classes_; ++cls) {
      std::int32_t t = next_[static_cast<std::size_t>(s) * num_classes_ + cls];
      if (t != kDead && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        work.push(t);
      }
    }
  }
  return false;
}

}  // namespace gramfuzz::regex
