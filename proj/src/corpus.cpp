#include "ifim/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"
#include "ifim/rng.hpp"
#include "ifim/text.hpp"

namespace ifim::corpus {

std::string_view to_string(Tag tag) {
  switch (tag) {
    case Tag::ifim:
      return "ifim";
    case Tag::plain_fim:
      return "plain_fim";
    case Tag::cfim:
      return "cfim";
  }
  return "plain_fim";
}

Tag parse_tag(std::string_view name) {
  if (name == "ifim") return Tag::ifim;
  if (name == "plain_fim") return Tag::plain_fim;
  if (name == "cfim") return Tag::cfim;
  throw InvalidInput("unknown tag '" + std::string(name) + "'");
}

std::vector<CodeSample> ingest_samples_from(std::string_view content) {
  std::vector<CodeSample> samples;
  std::unordered_set<std::string> seen;
  jsonl::for_each_record(content, [&](const nlohmann::json& j, const std::string& where) {
    CodeSample s;
    s.id = jsonl::required_string(j, "id", where);
    s.language = jsonl::required_string(j, "language", where);
    s.code = jsonl::required_string(j, "code", where);
    s.source = jsonl::optional_string(j, "source", where).value_or("");
    if (s.code.empty()) throw InvalidInput(where + ": empty \"code\"");
    if (s.language.empty()) throw InvalidInput(where + ": empty \"language\"");
    if (!seen.insert(s.id).second)
      throw InvalidInput(where + ": duplicate id '" + s.id + "'");
    samples.push_back(std::move(s));
  });
  return samples;
}

std::vector<CodeSample> ingest_samples(const std::filesystem::path& path) {
  return ingest_samples_from(jsonl::read_file(path));
}

FimTriplet select_middle_span(const CodeSample& sample, std::uint64_t seed,
                              int min_lines, int max_lines) {
  if (min_lines < 1 || max_lines < min_lines)
    throw InvalidInput("select_middle_span: need 1 <= min_lines <= max_lines");
  if (text::is_blank(sample.code))
    throw InvalidInput("select_middle_span: sample '" + sample.id +
                       "' has no non-blank line");

  const auto lines = text::split_lines(sample.code);
  const std::size_t n = lines.size();
  const std::size_t k_hi = std::min<std::size_t>(static_cast<std::size_t>(max_lines), n);
  const std::size_t k_lo = std::min<std::size_t>(static_cast<std::size_t>(min_lines), k_hi);

  SeededRng rng(seed);
  const auto k = static_cast<std::size_t>(rng.between(k_lo, k_hi));
  const auto start = static_cast<std::size_t>(rng.below(n - k + 1));

  FimTriplet t;
  t.prefix = text::join(lines, 0, start);
  t.middle = text::join(lines, start, start + k);
  t.suffix = text::join(lines, start + k, n);
  t.language = sample.language;
  t.sample_id = sample.id;
  return t;
}

std::string normalize_for_match(std::string_view code) {
  std::string out;
  out.reserve(code.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < code.size()) {
    const char c = code[i];
    const bool comment =
        c == '#' || (c == '/' && i + 1 < code.size() && code[i + 1] == '/');
    if (comment) {
      while (i < code.size() && code[i] != '\n') ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      ++i;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    ++i;
  }
  return out;
}

DecontaminationResult decontaminate(const std::vector<CodeSample>& samples,
                                    const std::vector<std::string>& contaminants) {
  std::vector<std::string> needles;
  for (const auto& c : contaminants) {
    auto n = normalize_for_match(c);
    if (!n.empty()) needles.push_back(std::move(n));
  }
  DecontaminationResult result;
  for (const auto& s : samples) {
    const auto hay = normalize_for_match(s.code);
    const bool hit = std::any_of(needles.begin(), needles.end(), [&](const std::string& n) {
      return hay.find(n) != std::string::npos;
    });
    (hit ? result.removed : result.kept).push_back(s);
  }
  return result;
}

std::size_t ifim_count(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::round(ratio * static_cast<double>(n)));
}

MixedDataset mix_ratio(const std::vector<InstructionRecord>& records, double ratio,
                       std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw InvalidInput("mix_ratio: ratio must lie in [0, 1]");
  MixedDataset out;
  out.ratio = ratio;
  out.seed = seed;
  out.records.reserve(records.size());
  for (const auto& r : records) out.records.push_back({r, Tag::plain_fim});

  const std::size_t count = ifim_count(records.size(), ratio);
  SeededRng rng(seed);
  const auto order = rng.permutation(records.size());
  for (std::size_t i = 0; i < count; ++i) out.records[order[i]].tag = Tag::ifim;
  return out;
}

FimTriplet to_cfim(const InstructionRecord& record, std::string_view comment_marker) {
  if (record.instruction.find_first_of("\r\n") != std::string::npos)
    throw InvalidInput("to_cfim: instruction spans more than one line");
  FimTriplet t = record.triplet;
  t.prefix.append(comment_marker);
  t.prefix.push_back(' ');
  t.prefix.append(record.instruction);
  t.prefix.push_back('\n');
  return t;
}

nlohmann::json to_json(const InstructionRecord& record, std::optional<Tag> tag) {
  const auto& t = record.triplet;
  nlohmann::json j;
  j["id"] = t.sample_id;
  j["language"] = t.language;
  j["prefix"] = t.prefix;
  j["middle"] = t.middle;
  j["suffix"] = t.suffix;
  if (!record.instruction.empty()) j["instruction"] = record.instruction;
  if (!record.synthesizer.empty()) j["synthesizer"] = record.synthesizer;
  if (tag) j["tag"] = std::string(to_string(*tag));
  return j;
}

ParsedRecord record_from_json(const nlohmann::json& j, const std::string& where) {
  ParsedRecord out;
  auto& t = out.record.triplet;
  t.sample_id = jsonl::required_string(j, "id", where);
  t.language = jsonl::required_string(j, "language", where);
  t.prefix = jsonl::required_string(j, "prefix", where);
  t.middle = jsonl::required_string(j, "middle", where);
  t.suffix = jsonl::required_string(j, "suffix", where);
  out.record.instruction = jsonl::optional_string(j, "instruction", where).value_or("");
  out.record.synthesizer = jsonl::optional_string(j, "synthesizer", where).value_or("");
  if (auto tag = jsonl::optional_string(j, "tag", where)) out.tag = parse_tag(*tag);
  return out;
}

std::vector<ParsedRecord> read_records_from(std::string_view content) {
  std::vector<ParsedRecord> out;
  jsonl::for_each_record(content, [&](const nlohmann::json& j, const std::string& where) {
    out.push_back(record_from_json(j, where));
  });
  return out;
}

std::vector<ParsedRecord> read_records(const std::filesystem::path& path) {
  return read_records_from(jsonl::read_file(path));
}

}  // namespace ifim::corpus
