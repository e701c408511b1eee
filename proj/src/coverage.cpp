#include "gramfuzz/coverage.hpp"

#include <algorithm>
#include <cstring>

#include "gramfuzz/bytes.hpp"

namespace gramfuzz {

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

CoverageMap& CoverageMap::operator=(const CoverageMap& o) {
  if (this != &o) {
    if (!cells_) cells_ = std::make_unique<std::uint8_t[]>(kMapSize);
    std::memcpy(cells_.get(), o.cells_.get(), kMapSize);
  }
  return *this;
}

void CoverageMap::clear() { std::memset(cells_.get(), 0, kMapSize); }

bool CoverageMap::all_zero() const {
  return std::all_of(cells_.get(), cells_.get() + kMapSize,
                     [](std::uint8_t c) { return c == 0; });
}

SparseCoverage compact(const std::uint8_t* cells) {
  SparseCoverage out;
  for (std::size_t w = 0; w < kMapSize; w += 8) {
    std::uint64_t word;
    std::memcpy(&word, cells + w, 8);
    if (word == 0) continue;
    for (std::size_t i = w; i < w + 8; ++i)
      if (cells[i]) out.emplace_back(static_cast<std::uint16_t>(i), cells[i]);
  }
  return out;
}

SparseCoverage compact(const CoverageMap& m) { return compact(m.data()); }

CoverageMap expand(const SparseCoverage& s) {
  CoverageMap m;
  for (auto [i, c] : s) m.set(i, c);
  return m;
}

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kSignatureSeed = 0x6a09e667f3bcc908ULL;

struct Digest {
  std::uint64_t h = kSignatureSeed;
  void add(std::size_t index, std::uint8_t count) {
    std::uint64_t key = (static_cast<std::uint64_t>(index) << 8) | bucketize(count);
    h = (h ^ mix64(key)) * 0x9e3779b97f4a7c15ULL;
  }
  CoverageSignature finish() const { return {mix64(h)}; }
};

Novelty novelty_of(const std::uint8_t* virgin, const SparseCoverage& cells) {
  Novelty result = Novelty::none;
  for (auto [i, c] : cells) {
    std::uint8_t bit = bucket_bit(bucketize(c));
    std::uint8_t v = virgin[i];
    if (v & bit) continue;
    if (v == 0) return Novelty::new_edge;
    result = Novelty::new_bucket;
  }
  return result;
}

}  // namespace

CoverageSignature signature(const CoverageMap& m) {
  Digest d;
  const std::uint8_t* cells = m.data();
  for (std::size_t i = 0; i < kMapSize; ++i)
    if (cells[i]) d.add(i, cells[i]);
  return d.finish();
}

CoverageSignature signature(const SparseCoverage& s) {
  Digest d;
  for (auto [i, c] : s) d.add(i, c);
  return d.finish();
}

const char* to_string(Novelty n) {
  switch (n) {
    case Novelty::none: return "none";
    case Novelty::new_bucket: return "new_bucket";
    case Novelty::new_edge: return "new_edge";
  }
  return "?";
}

Novelty GlobalCoverage::classify(const CoverageMap& m) {
  return classify(compact(m));
}

Novelty GlobalCoverage::classify(const SparseCoverage& m) {
  Novelty result = novelty_of(virgin_.data(), m);
  if (result != Novelty::none)
    for (auto [i, c] : m) virgin_[i] |= bucket_bit(bucketize(c));
  return result;
}

Novelty GlobalCoverage::peek(const SparseCoverage& m) const {
  return novelty_of(virgin_.data(), m);
}

std::size_t GlobalCoverage::edges_covered() const {
  return static_cast<std::size_t>(
      std::count_if(virgin_.begin(), virgin_.end(), [](std::uint8_t v) { return v != 0; }));
}

}  // namespace gramfuzz
