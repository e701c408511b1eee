#include "gramfuzz/mutate.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "gramfuzz/parse_tree.hpp"

namespace gramfuzz {

std::uint64_t Rng::below(std::uint64_t n) {
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    std::uint64_t v = eng_();
    if (v < limit) return v % n;
  }
}

namespace {

constexpr const char* kStrategyNames[kStrategyCount] = {
    "seed",      "flip1",      "flip2",      "flip4", "flip8", "flip16", "flip32",
    "arith8",    "arith16",    "arith32",    "interest8", "interest16", "interest32",
    "ui",        "uo",         "ai",         "ao",    "havoc", "splice", "tree"};

constexpr std::int8_t kInteresting8[] = {-128, -1, 0, 1, 16, 32, 64, 100, 127};
constexpr std::int16_t kInteresting16[] = {-128, -1,  0,    1,    16,   32,   64,
                                           100,  127, -32768, -129, 128, 255, 256,
                                           512,  1000, 1024, 4096, 32767};
constexpr std::int32_t kInteresting32[] = {
    -128,   -1,     0,     1,    16,   32,   64,   100,   127,
    -32768, -129,   128,   255,  256,  512,  1000, 1024,  4096,
    32767,  -2147483647 - 1, -100663046, -32769, 32768, 65535, 65536, 100663045,
    2147483647};

std::uint16_t swap16(std::uint16_t v) { return static_cast<std::uint16_t>((v << 8) | (v >> 8)); }
std::uint32_t swap32(std::uint32_t v) {
  return (v << 24) | ((v << 8) & 0x00ff0000u) | ((v >> 8) & 0x0000ff00u) | (v >> 24);
}

bool could_be_bitflip(std::uint32_t x) {
  if (!x) return true;
  unsigned sh = 0;
  while (!(x & 1)) {
    ++sh;
    x >>= 1;
  }
  if (x == 1 || x == 3 || x == 15) return true;
  if (sh & 7) return false;
  return x == 0xff || x == 0xffff || x == 0xffffffffu;
}

bool could_be_arith(std::uint32_t ov_, std::uint32_t nv_, unsigned blen) {
  if (ov_ == nv_) return true;
  std::uint32_t ov = 0, nv = 0;
  unsigned diffs = 0;
  for (unsigned i = 0; i < blen; ++i) {
    auto a = static_cast<std::uint8_t>(ov_ >> (8 * i));
    auto b = static_cast<std::uint8_t>(nv_ >> (8 * i));
    if (a != b) {
      ++diffs;
      ov = a;
      nv = b;
    }
  }
  if (diffs == 1) {
    if (static_cast<std::uint8_t>(ov - nv) <= kArithMax ||
        static_cast<std::uint8_t>(nv - ov) <= kArithMax)
      return true;
  }
  if (blen == 1) return false;
  diffs = 0;
  for (unsigned i = 0; i < blen / 2; ++i) {
    auto a = static_cast<std::uint16_t>(ov_ >> (16 * i));
    auto b = static_cast<std::uint16_t>(nv_ >> (16 * i));
    if (a != b) {
      ++diffs;
      ov = a;
      nv = b;
    }
  }
  if (diffs == 1) {
    if (static_cast<std::uint16_t>(ov - nv) <= kArithMax ||
        static_cast<std::uint16_t>(nv - ov) <= kArithMax)
      return true;
    ov = swap16(static_cast<std::uint16_t>(ov));
    nv = swap16(static_cast<std::uint16_t>(nv));
    if (static_cast<std::uint16_t>(ov - nv) <= kArithMax ||
        static_cast<std::uint16_t>(nv - ov) <= kArithMax)
      return true;
  }
  if (blen == 4) {
    if (ov_ - nv_ <= static_cast<std::uint32_t>(kArithMax) ||
        nv_ - ov_ <= static_cast<std::uint32_t>(kArithMax))
      return true;
    std::uint32_t so = swap32(ov_), sn = swap32(nv_);
    if (so - sn <= static_cast<std::uint32_t>(kArithMax) ||
        sn - so <= static_cast<std::uint32_t>(kArithMax))
      return true;
  }
  return false;
}

bool could_be_interest(std::uint32_t ov, std::uint32_t nv, unsigned blen, bool check_le) {
  if (ov == nv) return true;
  for (unsigned i = 0; i < blen; ++i) {
    for (auto v : kInteresting8) {
      std::uint32_t t = (ov & ~(0xffu << (i * 8))) |
                        (static_cast<std::uint32_t>(static_cast<std::uint8_t>(v)) << (i * 8));
      if (nv == t) return true;
    }
  }
  if (blen == 2 && !check_le) return false;
  for (unsigned i = 0; i + 1 < blen; ++i) {
    for (auto v : kInteresting16) {
      auto u = static_cast<std::uint16_t>(v);
      std::uint32_t t = (ov & ~(0xffffu << (i * 8))) | (static_cast<std::uint32_t>(u) << (i * 8));
      if (nv == t) return true;
      if (blen > 2) {
        t = (ov & ~(0xffffu << (i * 8))) | (static_cast<std::uint32_t>(swap16(u)) << (i * 8));
        if (nv == t) return true;
      }
    }
  }
  if (blen == 4 && check_le) {
    for (auto v : kInteresting32)
      if (nv == static_cast<std::uint32_t>(v)) return true;
  }
  return false;
}

std::uint16_t load16(const Bytes& b, std::size_t i) {
  std::uint16_t v;
  std::memcpy(&v, b.data() + i, 2);
  return v;
}
std::uint32_t load32(const Bytes& b, std::size_t i) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + i, 4);
  return v;
}
void store16(Bytes& b, std::size_t i, std::uint16_t v) { std::memcpy(b.data() + i, &v, 2); }
void store32(Bytes& b, std::size_t i, std::uint32_t v) { std::memcpy(b.data() + i, &v, 4); }

// Little-endian host assumed for the "le"/"be" naming below, as in AFL.
void flips(Bytes& buf, const MutantSink& emit, unsigned width_bits) {
  const std::size_t bits = buf.size() * 8;
  if (bits < width_bits) return;
  for (std::size_t b = 0; b + width_bits <= bits; ++b) {
    for (unsigned k = 0; k < width_bits; ++k) buf[(b + k) >> 3] ^= static_cast<char>(1u << ((b + k) & 7));
    emit(buf);
    for (unsigned k = 0; k < width_bits; ++k) buf[(b + k) >> 3] ^= static_cast<char>(1u << ((b + k) & 7));
  }
}

void byte_flips(Bytes& buf, const MutantSink& emit, std::size_t width) {
  if (buf.size() < width) return;
  for (std::size_t i = 0; i + width <= buf.size(); ++i) {
    for (std::size_t k = 0; k < width; ++k) buf[i + k] = static_cast<char>(~buf[i + k]);
    emit(buf);
    for (std::size_t k = 0; k < width; ++k) buf[i + k] = static_cast<char>(~buf[i + k]);
  }
}

void arith8(Bytes& buf, const MutantSink& emit, bool filt) {
  for (std::size_t i = 0; i < buf.size(); ++i) {
    auto orig = static_cast<std::uint8_t>(buf[i]);
    for (int j = 1; j <= kArithMax; ++j) {
      for (int sign : {1, -1}) {
        auto nv = static_cast<std::uint8_t>(orig + sign * j);
        if (nv == orig) continue;
        if (filt && could_be_bitflip(orig ^ nv)) continue;
        buf[i] = static_cast<char>(nv);
        emit(buf);
        buf[i] = static_cast<char>(orig);
      }
    }
  }
}

void arith16(Bytes& buf, const MutantSink& emit, bool filt) {
  if (buf.size() < 2) return;
  for (std::size_t i = 0; i + 2 <= buf.size(); ++i) {
    std::uint16_t orig = load16(buf, i);
    for (int j = 1; j <= kArithMax; ++j) {
      auto u = static_cast<std::uint16_t>(j);
      std::uint16_t cands[4] = {
          static_cast<std::uint16_t>(orig + u), static_cast<std::uint16_t>(orig - u),
          swap16(static_cast<std::uint16_t>(swap16(orig) + u)),
          swap16(static_cast<std::uint16_t>(swap16(orig) - u))};
      bool carries[4] = {(orig & 0xff) + j > 0xff, (orig & 0xff) < j,
                         (orig >> 8) + j > 0xff, (orig >> 8) < j};
      for (int k = 0; k < 4; ++k) {
        std::uint16_t nv = cands[k];
        if (nv == orig) continue;
        if (filt && (!carries[k] || could_be_bitflip(orig ^ nv))) continue;
        store16(buf, i, nv);
        emit(buf);
        store16(buf, i, orig);
      }
    }
  }
}

void arith32(Bytes& buf, const MutantSink& emit, bool filt) {
  if (buf.size() < 4) return;
  for (std::size_t i = 0; i + 4 <= buf.size(); ++i) {
    std::uint32_t orig = load32(buf, i);
    for (std::uint32_t j = 1; j <= static_cast<std::uint32_t>(kArithMax); ++j) {
      std::uint32_t cands[4] = {orig + j, orig - j, swap32(swap32(orig) + j),
                                swap32(swap32(orig) - j)};
      bool carries[4] = {(orig & 0xffff) + j > 0xffff, (orig & 0xffff) < j,
                         (swap32(orig) & 0xffff) + j > 0xffff, (swap32(orig) & 0xffff) < j};
      for (int k = 0; k < 4; ++k) {
        std::uint32_t nv = cands[k];
        if (nv == orig) continue;
        if (filt && (!carries[k] || could_be_bitflip(orig ^ nv))) continue;
        store32(buf, i, nv);
        emit(buf);
        store32(buf, i, orig);
      }
    }
  }
}

void interest8(Bytes& buf, const MutantSink& emit, bool filt) {
  for (std::size_t i = 0; i < buf.size(); ++i) {
    auto orig = static_cast<std::uint8_t>(buf[i]);
    for (auto v : kInteresting8) {
      auto nv = static_cast<std::uint8_t>(v);
      if (nv == orig) continue;
      if (filt && (could_be_bitflip(orig ^ nv) || could_be_arith(orig, nv, 1))) continue;
      buf[i] = static_cast<char>(nv);
      emit(buf);
      buf[i] = static_cast<char>(orig);
    }
  }
}

void interest16(Bytes& buf, const MutantSink& emit, bool filt) {
  if (buf.size() < 2) return;
  for (std::size_t i = 0; i + 2 <= buf.size(); ++i) {
    std::uint16_t orig = load16(buf, i);
    for (auto v : kInteresting16) {
      auto le = static_cast<std::uint16_t>(v);
      auto be = swap16(le);
      for (int k = 0; k < 2; ++k) {
        if (k == 1 && be == le) break;
        std::uint16_t nv = k == 0 ? le : be;
        if (nv == orig) continue;
        if (filt && (could_be_bitflip(orig ^ nv) || could_be_arith(orig, nv, 2) ||
                     could_be_interest(orig, nv, 2, k == 1)))
          continue;
        store16(buf, i, nv);
        emit(buf);
        store16(buf, i, orig);
      }
    }
  }
}

void interest32(Bytes& buf, const MutantSink& emit, bool filt) {
  if (buf.size() < 4) return;
  for (std::size_t i = 0; i + 4 <= buf.size(); ++i) {
    std::uint32_t orig = load32(buf, i);
    for (auto v : kInteresting32) {
      auto le = static_cast<std::uint32_t>(v);
      auto be = swap32(le);
      for (int k = 0; k < 2; ++k) {
        if (k == 1 && be == le) break;
        std::uint32_t nv = k == 0 ? le : be;
        if (nv == orig) continue;
        if (filt && (could_be_bitflip(orig ^ nv) || could_be_arith(orig, nv, 4) ||
                     could_be_interest(orig, nv, 4, k == 1)))
          continue;
        store32(buf, i, nv);
        emit(buf);
        store32(buf, i, orig);
      }
    }
  }
}

}  // namespace

const char* to_string(Strategy s) {
  auto i = static_cast<std::size_t>(s);
  return i < kStrategyCount ? kStrategyNames[i] : "?";
}

std::optional<Strategy> strategy_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kStrategyCount; ++i)
    if (name == kStrategyNames[i]) return static_cast<Strategy>(i);
  return std::nullopt;
}

bool is_flip(Strategy s) { return s >= Strategy::flip1 && s <= Strategy::flip32; }

void for_each_deterministic(ByteView input, Strategy stage, const MutantSink& emit,
                            DeterministicOptions opt) {
  Bytes buf(input);
  const bool f = opt.skip_redundant;
  switch (stage) {
    case Strategy::flip1: flips(buf, emit, 1); break;
    case Strategy::flip2: flips(buf, emit, 2); break;
    case Strategy::flip4: flips(buf, emit, 4); break;
    case Strategy::flip8: byte_flips(buf, emit, 1); break;
    case Strategy::flip16: byte_flips(buf, emit, 2); break;
    case Strategy::flip32: byte_flips(buf, emit, 4); break;
    case Strategy::arith8: arith8(buf, emit, f); break;
    case Strategy::arith16: arith16(buf, emit, f); break;
    case Strategy::arith32: arith32(buf, emit, f); break;
    case Strategy::interest8: interest8(buf, emit, f); break;
    case Strategy::interest16: interest16(buf, emit, f); break;
    case Strategy::interest32: interest32(buf, emit, f); break;
    default: throw std::invalid_argument(std::string("not a deterministic stage: ") + to_string(stage));
  }
}

MutationBatch deterministic_stage(ByteView input, Strategy stage, DeterministicOptions opt) {
  MutationBatch b;
  b.strategy = stage;
  for_each_deterministic(input, stage, [&](ByteView m) { b.mutants.emplace_back(m); }, opt);
  b.generated_count = b.mutants.size();
  return b;
}

namespace {

constexpr std::size_t kHavocMaxSize = 1 << 20;

std::size_t choose_block_len(Rng& rng, std::size_t limit) {
  std::size_t lo, hi;
  switch (rng.below(3)) {
    case 0: lo = 1; hi = 32; break;
    case 1: lo = 32; hi = 128; break;
    default:
      if (rng.below(10)) {
        lo = 128;
        hi = 1500;
      } else {
        lo = 1500;
        hi = 32768;
      }
  }
  if (lo >= limit) lo = 1;
  return lo + rng.below(std::min(hi, limit) - lo + 1);
}

void havoc_step(Bytes& b, Rng& rng) {
  const std::size_t n = b.size();
  switch (rng.below(11)) {
    case 0: {
      std::size_t bit = rng.below(n * 8);
      b[bit >> 3] ^= static_cast<char>(1u << (bit & 7));
      break;
    }
    case 1:
      b[rng.below(n)] = static_cast<char>(kInteresting8[rng.below(std::size(kInteresting8))]);
      break;
    case 2: {
      if (n < 2) break;
      auto v = static_cast<std::uint16_t>(kInteresting16[rng.below(std::size(kInteresting16))]);
      if (rng.below(2)) v = swap16(v);
      store16(b, rng.below(n - 1), v);
      break;
    }
    case 3: {
      if (n < 4) break;
      auto v = static_cast<std::uint32_t>(kInteresting32[rng.below(std::size(kInteresting32))]);
      if (rng.below(2)) v = swap32(v);
      store32(b, rng.below(n - 3), v);
      break;
    }
    case 4: {
      std::size_t i = rng.below(n);
      auto d = static_cast<int>(1 + rng.below(kArithMax));
      b[i] = static_cast<char>(static_cast<std::uint8_t>(b[i]) + (rng.below(2) ? d : -d));
      break;
    }
    case 5: {
      if (n < 2) break;
      std::size_t i = rng.below(n - 1);
      auto d = static_cast<std::uint16_t>(1 + rng.below(kArithMax));
      std::uint16_t v = load16(b, i);
      bool be = rng.below(2);
      if (be) v = swap16(v);
      v = rng.below(2) ? static_cast<std::uint16_t>(v + d) : static_cast<std::uint16_t>(v - d);
      store16(b, i, be ? swap16(v) : v);
      break;
    }
    case 6: {
      if (n < 4) break;
      std::size_t i = rng.below(n - 3);
      auto d = static_cast<std::uint32_t>(1 + rng.below(kArithMax));
      std::uint32_t v = load32(b, i);
      bool be = rng.below(2);
      if (be) v = swap32(v);
      v = rng.below(2) ? v + d : v - d;
      store32(b, i, be ? swap32(v) : v);
      break;
    }
    case 7: {
      std::size_t i = rng.below(n);
      b[i] = static_cast<char>(static_cast<std::uint8_t>(b[i]) ^ (1 + rng.below(255)));
      break;
    }
    case 8:
    case 9: {
      if (n < 2) break;
      std::size_t len = choose_block_len(rng, n - 1);
      std::size_t at = rng.below(n - len + 1);
      b.erase(at, len);
      break;
    }
    default: {
      bool clone = rng.below(4) != 0;
      std::size_t len, from = 0;
      if (clone) {
        len = choose_block_len(rng, n);
        from = rng.below(n - len + 1);
      } else {
        len = choose_block_len(rng, 32768);
      }
      if (n + len > kHavocMaxSize) break;
      std::size_t to = rng.below(n + 1);
      Bytes ins = clone ? b.substr(from, len)
                        : Bytes(len, rng.below(2) ? static_cast<char>(rng.below(256)) : b[rng.below(n)]);
      b.insert(to, ins);
      break;
    }
  }
}

}  // namespace

Bytes havoc_one(ByteView input, Rng& rng) {
  Bytes b(input);
  if (b.empty()) return b;
  std::size_t stack = std::size_t{1} << (1 + rng.below(6));
  for (std::size_t k = 0; k < stack; ++k) havoc_step(b, rng);
  return b;
}

MutationBatch havoc(ByteView input, Rng& rng, std::size_t count) {
  MutationBatch out;
  out.strategy = Strategy::havoc;
  out.mutants.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.mutants.push_back(havoc_one(input, rng));
  out.generated_count = out.mutants.size();
  return out;
}

std::optional<Bytes> splice_inputs(ByteView a, ByteView b, Rng& rng) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  const std::size_t m = std::min(a.size(), b.size());
  std::size_t f = m, l = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i] != b[i]) {
      if (f == m) f = i;
      l = i;
    }
  }
  if (f == m) return std::nullopt;
  std::size_t split = rng.between(f, l);
  Bytes out(a.substr(0, split));
  out.append(b.substr(split));
  return out;
}

std::vector<TokenRun> locate_token_runs(ByteView in) {
  std::vector<TokenRun> runs;
  std::size_t i = 0;
  while (i < in.size()) {
    if (!is_alnum_byte(static_cast<unsigned char>(in[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < in.size() && is_alnum_byte(static_cast<unsigned char>(in[j]))) ++j;
    runs.push_back({i, j});
    i = j;
  }
  return runs;
}

bool Dictionary::add(Bytes token, DictEntry::Origin origin, std::string name) {
  if (token.empty() || token.size() > kMaxTokenSize || contains(token)) return false;
  entries_.push_back({std::move(name), std::move(token), origin});
  return true;
}

bool Dictionary::contains(ByteView token) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const DictEntry& e) { return e.token == token; });
}

DictionaryError::DictionaryError(std::size_t line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Dictionary parse_dictionary(std::string_view text, DictEntry::Origin origin) {
  Dictionary d;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
    while (!line.empty() && is_space(line.back())) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::string name;
    std::size_t q = line.find('"');
    if (q == std::string_view::npos) throw DictionaryError(lineno, "expected a quoted token");
    if (q > 0) {
      std::string_view head = line.substr(0, q);
      while (!head.empty() && is_space(head.back())) head.remove_suffix(1);
      if (head.empty() || head.back() != '=') throw DictionaryError(lineno, "expected name=\"...\"");
      head.remove_suffix(1);
      while (!head.empty() && is_space(head.back())) head.remove_suffix(1);
      for (char c : head)
        if (!is_alnum_byte(static_cast<unsigned char>(c)) && c != '_')
          throw DictionaryError(lineno, "bad character in entry name");
      name = std::string(head);
    }
    if (line.size() < q + 2 || line.back() != '"')
      throw DictionaryError(lineno, "unterminated token");
    std::string_view body = line.substr(q + 1, line.size() - q - 2);
    Bytes tok;
    for (std::size_t i = 0; i < body.size(); ++i) {
      char c = body[i];
      if (c == '"') throw DictionaryError(lineno, "unescaped quote");
      if (c != '\\') {
        tok += c;
        continue;
      }
      if (++i >= body.size()) throw DictionaryError(lineno, "dangling backslash");
      if (body[i] == '\\' || body[i] == '"') {
        tok += body[i];
      } else if (body[i] == 'x' && i + 2 < body.size() && hex_value(body[i + 1]) >= 0 &&
                 hex_value(body[i + 2]) >= 0) {
        tok += static_cast<char>(hex_value(body[i + 1]) * 16 + hex_value(body[i + 2]));
        i += 2;
      } else {
        throw DictionaryError(lineno, "bad escape");
      }
    }
    if (tok.empty()) throw DictionaryError(lineno, "empty token");
    if (tok.size() > kMaxTokenSize) throw DictionaryError(lineno, "token longer than 128 bytes");
    d.add(std::move(tok), origin, std::move(name));
  }
  return d;
}

Dictionary load_dictionary_file(const std::filesystem::path& path, DictEntry::Origin origin) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read dictionary " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_dictionary(ss.str(), origin);
}

std::string escape_token(ByteView token) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : token) {
    if (c == '\\' || c == '"') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c >= 0x20 && c < 0x7f) {
      out += static_cast<char>(c);
    } else {
      out += "\\x";
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

Dictionary extract_auto_tokens(const std::vector<Bytes>& corpus, const GrammarSpec& g) {
  Dictionary d;
  for (const auto& t : g.tokens())
    if (!t.skip && t.literal) d.add(*t.literal, DictEntry::Origin::automatic, t.name);

  std::map<Bytes, std::size_t> freq;
  for (const auto& in : corpus)
    for (const auto& r : locate_token_runs(in))
      if (r.end - r.start >= 2 && r.end - r.start <= 32) ++freq[in.substr(r.start, r.end - r.start)];
  std::vector<std::pair<Bytes, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > 64) ranked.resize(64);
  for (auto& [tok, n] : ranked) d.add(tok, DictEntry::Origin::automatic);
  return d;
}

void merge_dictionary(Dictionary& dst, const Dictionary& src) {
  for (const auto& e : src.entries()) dst.add(e.token, e.origin, e.name);
}

Strategy dictionary_strategy(DictOp op, DictEntry::Origin origin) {
  bool user = origin == DictEntry::Origin::user;
  if (op == DictOp::insert) return user ? Strategy::ui : Strategy::ai;
  return user ? Strategy::uo : Strategy::ao;
}

void for_each_dictionary_mutant(ByteView in, const Dictionary& d, const DictSink& emit) {
  const std::size_t l = in.size();
  Bytes buf;
  auto insert_all = [&](std::size_t i) {
    for (const auto& e : d.entries()) {
      buf.assign(in.substr(0, i));
      buf += e.token;
      buf.append(in.substr(i));
      emit(buf, DictOp::insert, e);
    }
  };
  for (std::size_t i = 0; i < l;) {
    std::size_t j = i + 1;
    const bool curr = is_alnum_byte(static_cast<unsigned char>(in[i]));
    while (j < l && curr && is_alnum_byte(static_cast<unsigned char>(in[j]))) ++j;
    for (const auto& e : d.entries()) {
      buf.assign(in.substr(0, i));
      buf += e.token;
      buf.append(in.substr(i));
      emit(buf, DictOp::insert, e);
      if (in.substr(i, j - i) == e.token) continue;
      buf.assign(in.substr(0, i));
      buf += e.token;
      buf.append(in.substr(j));
      emit(buf, DictOp::overwrite, e);
    }
    i = j;
  }
  insert_all(l);
}

MutationBatch dictionary_mutate(ByteView input, const Dictionary& d) {
  MutationBatch b;
  b.strategy = Strategy::ui;
  for_each_dictionary_mutant(input, d, [&](ByteView m, DictOp op, const DictEntry& e) {
    b.mutants.emplace_back(m);
    b.tags.push_back(dictionary_strategy(op, e.origin));
  });
  b.generated_count = b.mutants.size();
  return b;
}

void for_each_naive_dictionary_mutant(ByteView in, const Dictionary& d, const DictSink& emit) {
  const std::size_t l = in.size();
  Bytes buf;
  for (std::size_t i = 0; i <= l; ++i) {
    for (const auto& e : d.entries()) {
      buf.assign(in.substr(0, i));
      buf += e.token;
      buf.append(in.substr(i));
      emit(buf, DictOp::insert, e);
      if (i + e.token.size() > l || in.substr(i, e.token.size()) == e.token) continue;
      buf.assign(in);
      buf.replace(i, e.token.size(), e.token);
      emit(buf, DictOp::overwrite, e);
    }
  }
}

MutationBatch naive_dictionary_mutate(ByteView input, const Dictionary& d) {
  MutationBatch b;
  b.strategy = Strategy::ui;
  for_each_naive_dictionary_mutant(input, d, [&](ByteView m, DictOp op, const DictEntry& e) {
    b.mutants.emplace_back(m);
    b.tags.push_back(dictionary_strategy(op, e.origin));
  });
  b.generated_count = b.mutants.size();
  return b;
}

std::size_t count_dictionary_mutants(ByteView in, const Dictionary& d) {
  std::size_t n = 0;
  const std::size_t l = in.size();
  for (std::size_t i = 0; i < l;) {
    std::size_t j = i + 1;
    const bool curr = is_alnum_byte(static_cast<unsigned char>(in[i]));
    while (j < l && curr && is_alnum_byte(static_cast<unsigned char>(in[j]))) ++j;
    for (const auto& e : d.entries()) n += in.substr(i, j - i) == e.token ? 1 : 2;
    i = j;
  }
  return n + d.size();
}

std::size_t count_naive_dictionary_mutants(ByteView in, const Dictionary& d) {
  std::size_t n = 0;
  const std::size_t l = in.size();
  for (std::size_t i = 0; i <= l; ++i)
    for (const auto& e : d.entries())
      n += (i + e.token.size() > l || in.substr(i, e.token.size()) == e.token) ? 1 : 2;
  return n;
}

namespace {

// k distinct values from [0, n), ascending (Floyd's sampling).
std::vector<std::uint64_t> sample_sorted(std::uint64_t n, std::uint64_t k, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

MutationBatch tree_mutate(ByteView tar, ByteView pro, const GrammarSpec& g, Rng& rng,
                          const TreeMutationLimits& lim) {
  if (tar.size() > lim.max_input_bytes) return MutationBatch{Strategy::tree, {}, {}, 0};
  auto tp = parse(g, tar);
  if (!tp) return MutationBatch{Strategy::tree, {}, {}, 0};
  std::optional<ParseTree> pt;
  if (pro.size() <= lim.max_input_bytes) {
    auto pp = parse(g, pro);
    if (pp) pt = std::move(pp.tree);
  }
  return tree_mutate(*tp.tree, pt ? &*pt : nullptr, rng, lim);
}

MutationBatch tree_mutate(const ParseTree& tar_tree, const ParseTree* pro_tree, Rng& rng,
                          const TreeMutationLimits& lim) {
  MutationBatch out;
  out.strategy = Strategy::tree;
  ByteView tar = tar_tree.source();
  if (tar.size() > lim.max_input_bytes) return out;
  const auto targets = enumerate_subtrees(tar_tree);
  if (targets.empty()) return out;

  struct PoolItem {
    ByteView text;
    Symbol kind;
  };
  std::vector<PoolItem> pool;
  auto add_pool = [&](const ParseTree& t) {
    for (const auto& s : enumerate_subtrees(t, lim.max_subtree_bytes))
      pool.push_back({ByteView(t.source()).substr(s.span.start, s.size_bytes), s.kind});
  };
  add_pool(tar_tree);
  if (pro_tree && pro_tree->source().size() <= lim.max_input_bytes) add_pool(*pro_tree);
  if (pool.size() > lim.max_pool) {
    std::vector<PoolItem> kept;
    for (auto i : sample_sorted(pool.size(), lim.max_pool, rng)) kept.push_back(pool[i]);
    pool = std::move(kept);
  }
  if (pool.empty()) return out;

  // Candidate pairs in (target, pool) order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::uint64_t total = 0;
  if (lim.same_kind) {
    for (std::uint32_t t = 0; t < targets.size(); ++t)
      for (std::uint32_t p = 0; p < pool.size(); ++p)
        if (pool[p].kind == targets[t].kind) pairs.emplace_back(t, p);
    total = pairs.size();
  } else {
    total = static_cast<std::uint64_t>(targets.size()) * pool.size();
  }
  out.generated_count = total;
  auto emit = [&](std::uint32_t t, std::uint32_t p) {
    out.mutants.push_back(splice(tar, targets[t].span, pool[p].text));
  };
  auto pair_at = [&](std::uint64_t idx) -> std::pair<std::uint32_t, std::uint32_t> {
    if (lim.same_kind) return pairs[idx];
    return {static_cast<std::uint32_t>(idx / pool.size()), static_cast<std::uint32_t>(idx % pool.size())};
  };
  if (total <= lim.max_mutants) {
    out.mutants.reserve(total);
    for (std::uint64_t i = 0; i < total; ++i) {
      auto [t, p] = pair_at(i);
      emit(t, p);
    }
  } else {
    out.mutants.reserve(lim.max_mutants);
    for (auto i : sample_sorted(total, lim.max_mutants, rng)) {
      auto [t, p] = pair_at(i);
      emit(t, p);
    }
  }
  return out;
}

}  // namespace gramfuzz
