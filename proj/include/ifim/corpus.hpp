#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include <json.hpp>

namespace ifim::corpus {

struct CodeSample {
  std::string id;
  std::string language;
  std::string code;
  std::string source;
};

/// A (prefix, middle, suffix) cut of one sample. prefix + middle + suffix is
/// the originating code, byte for byte.
struct FimTriplet {
  std::string prefix;
  std::string middle;
  std::string suffix;
  std::string language;
  std::string sample_id;

  std::string joined() const { return prefix + middle + suffix; }
  bool operator==(const FimTriplet&) const = default;
};

struct InstructionRecord {
  FimTriplet triplet;
  std::string instruction;
  std::string synthesizer;

  bool operator==(const InstructionRecord&) const = default;
};

enum class Tag { ifim, plain_fim, cfim };

std::string_view to_string(Tag tag);
Tag parse_tag(std::string_view name);

struct TaggedRecord {
  InstructionRecord record;
  Tag tag = Tag::plain_fim;
};

struct MixedDataset {
  std::vector<TaggedRecord> records;
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

/// Reads a JSONL corpus ({"id","language","code","source"?} per line).
/// Blank lines are skipped. Errors name the 1-based line number; a repeated
/// id is an error rather than silently dropped.
std::vector<CodeSample> ingest_samples(const std::filesystem::path& path);
std::vector<CodeSample> ingest_samples_from(std::string_view content);

/// Picks k contiguous whole lines as the middle, k uniform in
/// [min_lines, min(max_lines, line_count)], then a uniform start line.
FimTriplet select_middle_span(const CodeSample& sample, std::uint64_t seed,
                              int min_lines = 1, int max_lines = 3);

/// Lowercase, drop `#`/`//` comments to end of line, collapse whitespace runs.
std::string normalize_for_match(std::string_view code);

struct DecontaminationResult {
  std::vector<CodeSample> kept;
  std::vector<CodeSample> removed;
};

/// Removes every sample whose normalized code contains a normalized
/// contaminant. Contaminants that normalize to nothing are ignored.
DecontaminationResult decontaminate(const std::vector<CodeSample>& samples,
                                    const std::vector<std::string>& contaminants);

/// Tags exactly round(ratio * n) records as ifim (half away from zero), the
/// rest plain_fim, choosing the ifim subset by a seeded shuffle.
MixedDataset mix_ratio(const std::vector<InstructionRecord>& records, double ratio,
                       std::uint64_t seed);

std::size_t ifim_count(std::size_t n, double ratio);

/// CFIM baseline: the instruction becomes a line comment closing the prefix.
FimTriplet to_cfim(const InstructionRecord& record, std::string_view comment_marker);

/// Triplet/record JSONL: {"id","language","prefix","middle","suffix",
/// "instruction"?, "synthesizer"?, "tag"?}.
nlohmann::json to_json(const InstructionRecord& record, std::optional<Tag> tag = std::nullopt);

struct ParsedRecord {
  InstructionRecord record;
  std::optional<Tag> tag;
};

ParsedRecord record_from_json(const nlohmann::json& j, const std::string& where);
std::vector<ParsedRecord> read_records(const std::filesystem::path& path);
std::vector<ParsedRecord> read_records_from(std::string_view content);

}  // namespace ifim::corpus
