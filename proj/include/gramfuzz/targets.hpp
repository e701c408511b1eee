#pragma once

// Bundled instrumented targets. Every instrumentation point is a labeled
// block with a stage; the inventories below are what the fixture files in
// fixtures/blocks/ record.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gramfuzz/bytes.hpp"
#include "gramfuzz/harness.hpp"

namespace gramfuzz::targets {

enum class Stage : std::uint8_t { parse, check, eval };
const char* to_string(Stage s);

struct Block {
  std::string label;
  Stage stage;
  std::uint32_t id;
};

/// Assigns block ids from hashed labels, probing past collisions, so ids
/// are stable as long as labels are. Id 0 is never used.
std::vector<Block> make_inventory(const std::vector<std::pair<const char*, Stage>>& labels);

/// Tab-separated "label stage id" lines, one per block.
std::string inventory_tsv(const std::vector<Block>& blocks);

const std::vector<Block>& xml_blocks();
const std::vector<Block>& minijs_blocks();

/// Plist-XML checker: tokenizer/parser, well-formedness, value interpretation.
/// Planted fault: a well-formed <data> value that decodes to 13 bytes.
void toy_xml_target(ByteView input, CoverageSink& cov);

/// Mini-JS engine: parse, scope check, evaluate. Planted fault in the
/// RegExp.rightContext getter (see fixtures/minijs/planted_bug.js).
void toy_minijs_target(ByteView input, CoverageSink& cov);

/// Output produced by print() during the last minijs run in this process
/// (tests only; forked executions do not propagate it).
const std::string& minijs_last_output();

/// Test fixtures: one edge per distinct input byte; crash on "CRASH"
/// prefix; spin forever on "HANG" prefix.
void fixture_target(ByteView input, CoverageSink& cov);

}  // namespace gramfuzz::targets
