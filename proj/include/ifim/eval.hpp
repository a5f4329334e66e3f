#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ifim/bench.hpp"
#include "ifim/format.hpp"

namespace ifim::eval {

/// Model under evaluation. generate() throws on failure; the harness turns
/// that into a backend_error row.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string name() const = 0;
  virtual std::string generate(std::string_view input, int max_new_tokens, bool greedy) = 0;
  virtual bool concurrent() const { return true; }
};

struct EvalConfig {
  int max_new_tokens = 128;
  bool greedy = true;
  bool with_instruction = false;
  format::Mode mode = format::BaseMode::PSM;
  format::SentinelSet sentinels;
  double timeout_s = 10.0;
  /// Line-comment opener used for base-mode runs that carry an instruction.
  std::string comment_marker = "#";
  /// End-of-text markers; sentinels always stop a completion as well.
  std::vector<std::string> stop = {"<EOT>", "<|endoftext|>"};
  std::vector<std::string> interpreter = {"python3"};
  std::size_t jobs = 0;  ///< 0 = hardware concurrency
};

enum class FailureKind { none, test_fail, timeout, crash, backend_error };

std::string_view to_string(FailureKind kind);
FailureKind parse_failure_kind(std::string_view name);

struct EvalResult {
  std::string task_id;
  std::string completion;
  bool passed = false;
  FailureKind failure_kind = FailureKind::none;
  double wall_time_ms = 0.0;
  std::string detail;
};

/// IFIM mode + instruction: IFIM layout. Base mode + instruction: the
/// instruction becomes a comment line closing the prefix. Without instruction:
/// plain FIM of the base mode.
std::string build_eval_input(const bench::BenchmarkTask& task, const EvalConfig& cfg);

/// Cuts at the earliest sentinel or stop marker.
std::string truncate_completion(std::string_view text, const EvalConfig& cfg);

struct ExecOutcome {
  bool passed = false;
  FailureKind failure_kind = FailureKind::crash;
  double wall_time_ms = 0.0;
  std::string detail;
};

/// Runs prefix + completion + suffix followed by the tests in a child process.
/// Never throws: launch problems grade as crash.
ExecOutcome execute_candidate(const bench::BenchmarkTask& task, std::string_view completion,
                              double timeout_s,
                              const std::vector<std::string>& interpreter = {"python3"});

std::vector<EvalResult> run_benchmark(CompletionBackend& backend,
                                      const std::vector<bench::BenchmarkTask>& tasks,
                                      const EvalConfig& cfg);

/// Percentage of passed results. Throws on an empty list.
double pass_at_1(const std::vector<EvalResult>& results);
std::string format_percent(double pct);

nlohmann::json to_json(const EvalResult& result);
EvalResult result_from_json(const nlohmann::json& j, const std::string& where);

struct RunKey {
  std::string model;
  std::string benchmark;
  bool with_instruction = false;

  auto operator<=>(const RunKey&) const = default;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

/// Rows are models, columns benchmark x {w/ ins., w/o ins.} as present in
/// `runs`, cells Pass@1 with one decimal; absent cells hold U+2014.
Table report_table(const std::map<RunKey, std::vector<EvalResult>>& runs);

// ---------------------------------------------------------------------------
// Backends without a network.

/// Answers every task with its canonical middle.
class OracleBackend final : public CompletionBackend {
 public:
  OracleBackend(const std::vector<bench::BenchmarkTask>& tasks, const EvalConfig& cfg);
  std::string name() const override { return "oracle"; }
  std::string generate(std::string_view input, int max_new_tokens, bool greedy) override;

 private:
  std::unordered_map<std::string, std::string> answers_;
};

/// Looks the input up in a fixed table; unknown inputs throw.
class ScriptedBackend final : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::unordered_map<std::string, std::string> answers,
                           std::string label = "scripted");
  /// Keys the answers by each task's rendered input under `cfg`.
  static ScriptedBackend for_tasks(const std::vector<bench::BenchmarkTask>& tasks,
                                   const EvalConfig& cfg,
                                   const std::map<std::string, std::string>& by_task_id,
                                   std::string label = "scripted");

  std::string name() const override { return label_; }
  std::string generate(std::string_view input, int max_new_tokens, bool greedy) override;

 private:
  std::unordered_map<std::string, std::string> answers_;
  std::string label_;
};

/// Delegates to a function; handy in tests.
class FunctionBackend final : public CompletionBackend {
 public:
  using Fn = std::function<std::string(std::string_view input)>;
  FunctionBackend(Fn fn, std::string label = "function", bool concurrent = true);
  std::string name() const override { return label_; }
  std::string generate(std::string_view input, int max_new_tokens, bool greedy) override;
  bool concurrent() const override { return concurrent_; }

 private:
  Fn fn_;
  std::string label_;
  bool concurrent_;
};

}  // namespace ifim::eval
