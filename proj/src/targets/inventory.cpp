#include <unordered_set>

#include "gramfuzz/targets.hpp"

namespace gramfuzz::targets {

const char* to_string(Stage s) {
  switch (s) {
    case Stage::parse: return "parse";
    case Stage::check: return "check";
    case Stage::eval: return "eval";
  }
  return "?";
}

std::vector<Block> make_inventory(const std::vector<std::pair<const char*, Stage>>& labels) {
  std::vector<Block> out;
  std::unordered_set<std::uint32_t> used{0};
  for (auto [label, stage] : labels) {
    std::uint64_t h = fnv1a64(label);
    auto id = static_cast<std::uint32_t>((h ^ (h >> 16) ^ (h >> 32) ^ (h >> 48)) & 0xffff);
    while (used.count(id)) id = (id + 1) & 0xffff;
    used.insert(id);
    out.push_back({label, stage, id});
  }
  return out;
}

std::string inventory_tsv(const std::vector<Block>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    out += b.label;
    out += '\t';
    out += to_string(b.stage);
    out += '\t';
    out += std::to_string(b.id);
    out += '\n';
  }
  return out;
}

void fixture_target(ByteView input, CoverageSink& cov) {
  cov.hit(1);
  if (input.starts_with("CRASH")) cov.crash("fixture-crash");
  if (input.starts_with("HANG")) {
    for (std::uint32_t i = 0;; ++i) cov.hit(2 + (i & 1));
  }
  if (input.starts_with("SEGV")) {
    volatile int* p = nullptr;
    *p = 1;
  }
  bool seen[256] = {};
  for (unsigned char c : input) {
    if (!seen[c]) cov.hit(100 + c);
    seen[c] = true;
  }
}

}  // namespace gramfuzz::targets

namespace gramfuzz {

namespace {

struct Builtin {
  const char* name;
  TargetFn fn;
};

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> list = {
      {"xml", targets::toy_xml_target},
      {"minijs", targets::toy_minijs_target},
      {"fixture", targets::fixture_target},
  };
  return list;
}

}  // namespace

std::optional<TargetSpec> builtin_target(std::string_view name) {
  for (const auto& b : builtins()) {
    if (name != b.name) continue;
    TargetSpec t;
    t.kind = TargetSpec::Kind::in_process;
    t.name = b.name;
    t.function = b.fn;
    return t;
  }
  return std::nullopt;
}

std::vector<std::string> builtin_target_names() {
  std::vector<std::string> out;
  for (const auto& b : builtins()) out.emplace_back(b.name);
  return out;
}

}  // namespace gramfuzz
