#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ifim/synth.hpp"

namespace ifim::bench {

enum class Origin { humaneval_infilling, repomastereval, custom };

std::string_view to_string(Origin origin);
/// Accepts the canonical names plus the short forms "humaneval" and "rme".
Origin parse_origin(std::string_view name);

struct BenchmarkTask {
  std::string task_id;
  std::string prefix;
  std::string suffix;
  std::string canonical_middle;
  std::string tests;
  std::optional<std::string> instruction;
  Origin origin = Origin::custom;
  std::string language = "python";

  corpus::FimTriplet triplet() const;
};

/// One task per non-blank line of `solution`. `context` (e.g. a function
/// signature) is prepended to every prefix, so prefix + middle + suffix is
/// context + solution.
std::vector<BenchmarkTask> derive_single_line_tasks(const std::string& problem_id,
                                                    std::string_view solution,
                                                    std::string_view tests,
                                                    std::string_view context = {},
                                                    Origin origin = Origin::custom);

/// Drops string-literal statements that open a module, class or function
/// body. A body left empty gets a `pass` in place of its docstring.
std::string strip_docstrings(std::string_view source);

BenchmarkTask truncate_context(BenchmarkTask task, std::size_t prefix_keep = 20,
                               std::size_t suffix_keep = 20);

struct SamplingPlan {
  std::uint64_t population = 0;
  double confidence = 0.95;
  double margin = 0.05;
  double proportion = 0.5;
  std::uint64_t sample_size = 0;
};

/// Two-sided normal quantile for a confidence level (1.959964 at 0.95).
double z_score(double confidence);

/// Cochran's n0 = z^2 p(1-p) / e^2 with finite-population correction,
/// rounded up: n = ceil(n0 N / (N + n0 - 1)).
std::uint64_t sample_size(std::uint64_t population, double confidence = 0.95,
                          double margin = 0.05, double proportion = 0.5);

SamplingPlan plan_sample(std::uint64_t population, double confidence = 0.95,
                         double margin = 0.05, double proportion = 0.5);

/// Seeded uniform sample without replacement, kept in original order.
std::vector<BenchmarkTask> draw_subset(const std::vector<BenchmarkTask>& tasks, std::size_t n,
                                       std::uint64_t seed);

struct AttachReport {
  std::vector<BenchmarkTask> tasks;
  std::vector<std::string> rejected;  ///< filter rejected every attempt
  std::vector<std::pair<std::string, std::string>> failed;  ///< task id, error
};

AttachReport attach_instructions(std::vector<BenchmarkTask> tasks, synth::SynthBackend& backend,
                                 int retries = 2, std::size_t max_in_flight = 8);

/// Benchmark JSONL: {"task_id","origin","prefix","suffix","canonical_middle",
/// "tests","instruction"?,"language"}.
nlohmann::json to_json(const BenchmarkTask& task);
BenchmarkTask task_from_json(const nlohmann::json& j, const std::string& where);
std::vector<BenchmarkTask> read_tasks(const std::filesystem::path& path);
std::vector<BenchmarkTask> read_tasks_from(std::string_view content);

/// Upstream HumanEval problem ({"task_id","prompt","canonical_solution",
/// "test","entry_point"}).
struct HumanEvalProblem {
  std::string task_id;
  std::string prompt;
  std::string canonical_solution;
  std::string test;
  std::string entry_point;

  /// Test harness appended after the candidate program.
  std::string test_program() const;
};

std::vector<HumanEvalProblem> read_humaneval(std::string_view content);

}  // namespace ifim::bench
