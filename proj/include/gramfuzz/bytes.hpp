#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace gramfuzz {

// Test inputs are arbitrary byte strings; std::string is used as the
// container because it is binary-safe and cheap to slice.
using Bytes = std::string;
using ByteView = std::string_view;

/// Half-open byte range [start, end) into some source buffer.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end == start; }
  bool contains(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

/// FNV-1a, 64-bit. Used for entry hashes and digests written to disk.
inline std::uint64_t fnv1a64(ByteView data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

inline bool is_alnum_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

}  // namespace gramfuzz
