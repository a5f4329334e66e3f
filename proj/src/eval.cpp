#include "ifim/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"
#include "ifim/sandbox.hpp"

namespace ifim::eval {

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::none:
      return "none";
    case FailureKind::test_fail:
      return "test_fail";
    case FailureKind::timeout:
      return "timeout";
    case FailureKind::crash:
      return "crash";
    case FailureKind::backend_error:
      return "backend_error";
  }
  return "crash";
}

FailureKind parse_failure_kind(std::string_view name) {
  for (auto k : {FailureKind::none, FailureKind::test_fail, FailureKind::timeout,
                 FailureKind::crash, FailureKind::backend_error})
    if (to_string(k) == name) return k;
  throw InvalidInput("unknown failure kind '" + std::string(name) + "'");
}

std::string build_eval_input(const bench::BenchmarkTask& task, const EvalConfig& cfg) {
  corpus::InstructionRecord record{task.triplet(), {}, {}};
  if (!cfg.with_instruction) {
    return format::render_fim(record.triplet, format::base_of(cfg.mode), cfg.sentinels).layout();
  }
  if (!task.instruction || task.instruction->empty())
    throw InvalidInput("task " + task.task_id + " has no instruction");
  record.instruction = *task.instruction;
  if (const auto* m = std::get_if<format::IfimMode>(&cfg.mode))
    return format::render_ifim(record, *m, cfg.sentinels).layout();
  const auto commented = corpus::to_cfim(record, cfg.comment_marker);
  return format::render_fim(commented, format::base_of(cfg.mode), cfg.sentinels).layout();
}

std::string truncate_completion(std::string_view text, const EvalConfig& cfg) {
  std::size_t cut = text.size();
  auto consider = [&](std::string_view marker) {
    if (marker.empty()) return;
    const auto pos = text.find(marker);
    if (pos != std::string_view::npos) cut = std::min(cut, pos);
  };
  const auto& s = cfg.sentinels;
  for (const auto* m : {&s.pre, &s.suf, &s.mid, &s.ins}) consider(*m);
  for (const auto& m : cfg.stop) consider(m);
  return std::string(text.substr(0, cut));
}

ExecOutcome execute_candidate(const bench::BenchmarkTask& task, std::string_view completion,
                              double timeout_s, const std::vector<std::string>& interpreter) {
  ExecOutcome out;
  try {
    sandbox::TempDir dir("ifim-exec");
    std::string program = task.prefix;
    program.append(completion);
    program.append(task.suffix);
    if (!program.empty() && program.back() != '\n') program.push_back('\n');
    program.append("\n");
    program.append(task.tests);
    const auto file = dir.path() / "candidate.py";
    jsonl::write_file(file, program);

    auto argv = interpreter;
    argv.push_back(file.string());
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    const auto run = sandbox::run_process(argv, dir.path(), timeout);
    out.wall_time_ms = run.wall_ms;
    switch (run.kind) {
      case sandbox::ExitKind::timed_out:
        out.failure_kind = FailureKind::timeout;
        out.detail = "killed after " + std::to_string(timeout_s) + " s";
        break;
      case sandbox::ExitKind::launch_failed:
        out.failure_kind = FailureKind::crash;
        out.detail = run.stderr_text;
        break;
      case sandbox::ExitKind::signaled:
        out.failure_kind = FailureKind::crash;
        out.detail = "signal " + std::to_string(run.signal);
        break;
      case sandbox::ExitKind::exited:
        if (run.exit_code == 0) {
          out.passed = true;
          out.failure_kind = FailureKind::none;
        } else {
          out.failure_kind = run.stderr_text.find("AssertionError") != std::string::npos
                                 ? FailureKind::test_fail
                                 : FailureKind::crash;
          out.detail = run.stderr_text;
        }
        break;
    }
  } catch (const std::exception& e) {
    out.passed = false;
    out.failure_kind = FailureKind::crash;
    out.detail = std::string("sandbox: ") + e.what();
  }
  return out;
}

std::vector<EvalResult> run_benchmark(CompletionBackend& backend,
                                      const std::vector<bench::BenchmarkTask>& tasks,
                                      const EvalConfig& cfg) {
  if (cfg.max_new_tokens < 1) throw InvalidInput("max_new_tokens must be >= 1");
  std::vector<EvalResult> results(tasks.size());
  std::mutex backend_mutex;

  auto run_one = [&](std::size_t i) {
    const auto& task = tasks[i];
    auto& r = results[i];
    r.task_id = task.task_id;
    const auto start = std::chrono::steady_clock::now();
    std::string raw;
    try {
      const auto input = build_eval_input(task, cfg);
      if (backend.concurrent()) {
        raw = backend.generate(input, cfg.max_new_tokens, cfg.greedy);
      } else {
        std::lock_guard lock(backend_mutex);
        raw = backend.generate(input, cfg.max_new_tokens, cfg.greedy);
      }
    } catch (const std::exception& e) {
      r.failure_kind = FailureKind::backend_error;
      r.detail = e.what();
      r.wall_time_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return;
    }
    r.completion = truncate_completion(raw, cfg);
    const auto exec = execute_candidate(task, r.completion, cfg.timeout_s, cfg.interpreter);
    r.passed = exec.passed;
    r.failure_kind = exec.failure_kind;
    r.detail = exec.detail;
    r.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  std::size_t jobs = cfg.jobs != 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(tasks.size(), 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) run_one(i);
    });
  for (auto& t : pool) t.join();
  return results;
}

double pass_at_1(const std::vector<EvalResult>& results) {
  if (results.empty()) throw InvalidInput("pass_at_1: no results");
  const auto passed = std::count_if(results.begin(), results.end(),
                                    [](const EvalResult& r) { return r.passed; });
  return 100.0 * static_cast<double>(passed) / static_cast<double>(results.size());
}

std::string format_percent(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  return buf;
}

nlohmann::json to_json(const EvalResult& result) {
  nlohmann::json j;
  j["task_id"] = result.task_id;
  j["completion"] = result.completion;
  j["passed"] = result.passed;
  j["failure_kind"] = std::string(to_string(result.failure_kind));
  j["wall_time_ms"] = std::round(result.wall_time_ms * 1000.0) / 1000.0;
  if (!result.detail.empty()) j["detail"] = result.detail;
  return j;
}

EvalResult result_from_json(const nlohmann::json& j, const std::string& where) {
  EvalResult r;
  r.task_id = jsonl::required_string(j, "task_id", where);
  r.completion = jsonl::optional_string(j, "completion", where).value_or("");
  r.passed = j.value("passed", false);
  r.failure_kind = parse_failure_kind(jsonl::required_string(j, "failure_kind", where));
  r.wall_time_ms = j.value("wall_time_ms", 0.0);
  r.detail = jsonl::optional_string(j, "detail", where).value_or("");
  if (r.passed && r.failure_kind != FailureKind::none)
    throw InvalidInput(where + ": passed result with a failure kind");
  return r;
}

namespace {

std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Table report_table(const std::map<RunKey, std::vector<EvalResult>>& runs) {
  std::set<std::string> models;
  // (benchmark, !with_instruction) sorts "w/ ins." ahead of "w/o ins.".
  std::set<std::pair<std::string, bool>> columns;
  for (const auto& [key, results] : runs) {
    models.insert(key.model);
    columns.insert({key.benchmark, !key.with_instruction});
  }
  Table t;
  t.header.push_back("Model");
  for (const auto& [bench_name, without] : columns)
    t.header.push_back(bench_name + (without ? " w/o ins." : " w/ ins."));
  for (const auto& model : models) {
    std::vector<std::string> row{model};
    for (const auto& [bench_name, without] : columns) {
      const auto it = runs.find(RunKey{model, bench_name, !without});
      row.push_back(it == runs.end() || it->second.empty() ? "—"
                                                           : format_percent(pass_at_1(it->second)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], display_width(row[c]));
  };
  widen(header);
  for (const auto& r : rows) widen(r);
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - display_width(row[c]), ' ');
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  total += 2 * (width.empty() ? 0 : width.size() - 1);
  out << std::string(total, '-') << '\n';
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string Table::to_csv() const {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(row[c]);
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out.str();
}

OracleBackend::OracleBackend(const std::vector<bench::BenchmarkTask>& tasks,
                             const EvalConfig& cfg) {
  for (const auto& t : tasks) {
    try {
      answers_[build_eval_input(t, cfg)] = t.canonical_middle;
    } catch (const InvalidInput&) {
      // Tasks that cannot be rendered never reach generate().
    }
  }
}

std::string OracleBackend::generate(std::string_view input, int, bool) {
  const auto it = answers_.find(std::string(input));
  if (it == answers_.end()) throw Error("oracle: unknown input");
  return it->second;
}

ScriptedBackend::ScriptedBackend(std::unordered_map<std::string, std::string> answers,
                                 std::string label)
    : answers_(std::move(answers)), label_(std::move(label)) {}

ScriptedBackend ScriptedBackend::for_tasks(const std::vector<bench::BenchmarkTask>& tasks,
                                           const EvalConfig& cfg,
                                           const std::map<std::string, std::string>& by_task_id,
                                           std::string label) {
  std::unordered_map<std::string, std::string> answers;
  for (const auto& t : tasks) {
    const auto it = by_task_id.find(t.task_id);
    if (it == by_task_id.end()) continue;
    std::string input;
    try {
      input = build_eval_input(t, cfg);
    } catch (const InvalidInput&) {
      continue;
    }
    const auto [slot, fresh] = answers.emplace(input, it->second);
    if (!fresh && slot->second != it->second)
      throw InvalidInput("scripted backend: tasks share an input but not an answer (" + t.task_id + ")");
  }
  return ScriptedBackend(std::move(answers), std::move(label));
}

std::string ScriptedBackend::generate(std::string_view input, int, bool) {
  const auto it = answers_.find(std::string(input));
  if (it == answers_.end()) throw Error(label_ + ": no scripted answer for this input");
  return it->second;
}

FunctionBackend::FunctionBackend(Fn fn, std::string label, bool concurrent)
    : fn_(std::move(fn)), label_(std::move(label)), concurrent_(concurrent) {}

std::string FunctionBackend::generate(std::string_view input, int, bool) { return fn_(input); }

}  // namespace ifim::eval
