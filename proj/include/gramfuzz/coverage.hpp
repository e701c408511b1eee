#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace gramfuzz {

inline constexpr std::size_t kMapSize = 65536;

/// AFL-style edge id: cur xor (prev >> 1), reduced modulo the map size.
constexpr std::uint32_t edge_index(std::uint32_t prev_block, std::uint32_t cur_block) {
  return (cur_block ^ (prev_block >> 1)) % kMapSize;
}

/// Hit-count class: 0, 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128-255 map to
/// classes 0..8.
constexpr std::uint8_t bucketize(std::uint8_t count) {
  if (count < 4) return count;
  if (count < 8) return 4;
  if (count < 16) return 5;
  if (count < 32) return 6;
  if (count < 128) return 7;
  return 8;
}

/// Bit recorded in the virgin map for a nonzero class.
constexpr std::uint8_t bucket_bit(std::uint8_t bucket_class) {
  return bucket_class == 0 ? 0 : static_cast<std::uint8_t>(1u << (bucket_class - 1));
}

/// Per-execution hit counters, one byte per edge, saturating at 255.
class CoverageMap {
 public:
  CoverageMap() : cells_(std::make_unique<std::uint8_t[]>(kMapSize)) {}
  CoverageMap(const CoverageMap& o) : CoverageMap() { *this = o; }
  CoverageMap& operator=(const CoverageMap& o);
  CoverageMap(CoverageMap&&) noexcept = default;
  CoverageMap& operator=(CoverageMap&&) noexcept = default;

  std::uint8_t* data() { return cells_.get(); }
  const std::uint8_t* data() const { return cells_.get(); }
  std::span<const std::uint8_t, kMapSize> cells() const {
    return std::span<const std::uint8_t, kMapSize>(cells_.get(), kMapSize);
  }
  std::uint8_t operator[](std::size_t i) const { return cells_[i]; }

  void hit(std::uint32_t edge) {
    std::uint8_t& c = cells_[edge % kMapSize];
    if (c != 255) ++c;
  }
  void set(std::size_t i, std::uint8_t v) { cells_[i] = v; }
  void clear();
  bool all_zero() const;

 private:
  std::unique_ptr<std::uint8_t[]> cells_;
};

/// Nonzero cells only, ascending by index. This is what workers hand back to
/// the coordinator instead of the full map.
using SparseCoverage = std::vector<std::pair<std::uint16_t, std::uint8_t>>;

SparseCoverage compact(const CoverageMap& m);
SparseCoverage compact(const std::uint8_t* cells);
CoverageMap expand(const SparseCoverage& s);

struct CoverageSignature {
  std::uint64_t digest = 0;
  friend bool operator==(const CoverageSignature&, const CoverageSignature&) = default;
};

/// Digest of a map with no nonzero cell.
inline constexpr std::uint64_t kZeroMapDigest = 0x492b8d6066c09227ULL;

/// Digest over (index, bucket class) of every nonzero cell.
CoverageSignature signature(const CoverageMap& m);
CoverageSignature signature(const SparseCoverage& s);

enum class Novelty { none, new_bucket, new_edge };

const char* to_string(Novelty n);

/// Accumulated bucket classes seen per edge over a whole campaign.
class GlobalCoverage {
 public:
  GlobalCoverage() : virgin_(kMapSize, 0) {}

  /// Classifies m against everything seen so far, then records m.
  Novelty classify(const CoverageMap& m);
  Novelty classify(const SparseCoverage& m);

  /// Same decision without recording.
  Novelty peek(const SparseCoverage& m) const;

  std::uint8_t virgin(std::size_t i) const { return virgin_[i]; }
  std::size_t edges_covered() const;

 private:
  std::vector<std::uint8_t> virgin_;
};

}  // namespace gramfuzz
