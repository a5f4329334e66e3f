#include "ifim/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"
#include "ifim/rng.hpp"
#include "ifim/text.hpp"

namespace ifim::bench {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::humaneval_infilling:
      return "humaneval_infilling";
    case Origin::repomastereval:
      return "repomastereval";
    case Origin::custom:
      return "custom";
  }
  return "custom";
}

Origin parse_origin(std::string_view name) {
  if (name == "humaneval_infilling" || name == "humaneval") return Origin::humaneval_infilling;
  if (name == "repomastereval" || name == "rme") return Origin::repomastereval;
  if (name == "custom") return Origin::custom;
  throw InvalidInput("unknown benchmark origin '" + std::string(name) + "'");
}

corpus::FimTriplet BenchmarkTask::triplet() const {
  return {prefix, canonical_middle, suffix, language, task_id};
}

std::vector<BenchmarkTask> derive_single_line_tasks(const std::string& problem_id,
                                                    std::string_view solution,
                                                    std::string_view tests,
                                                    std::string_view context, Origin origin) {
  if (text::is_blank(solution))
    throw InvalidInput("derive_single_line_tasks: blank solution for " + problem_id);
  const auto lines = text::split_lines(solution);
  std::vector<BenchmarkTask> tasks;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (text::is_blank(lines[k])) continue;
    BenchmarkTask t;
    t.task_id = problem_id + "/" + std::to_string(k);
    t.prefix = std::string(context) + text::join(lines, 0, k);
    t.canonical_middle = std::string(lines[k]);
    t.suffix = text::join(lines, k + 1, lines.size());
    t.tests = std::string(tests);
    t.origin = origin;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// Docstring stripping
//
// A line scanner that understands strings, comments, brackets and explicit
// continuations well enough to find logical lines. No full parse.

namespace {

struct LogicalLine {
  std::size_t begin = 0;       // start of the first physical line
  std::size_t end = 0;         // one past the last byte (newline included)
  std::size_t code_begin = 0;  // first non-blank byte
  std::size_t code_end = 0;    // one past the last code byte (comments excluded)
  std::size_t indent = 0;
  bool significant = false;    // holds code, not just blanks/comments
  int literals = 0;
  std::size_t literal_begin = 0;  // of the first literal, prefix letters included
  std::size_t literal_end = 0;
  bool docstring_prefix_ok = true;
};

bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

// Returns false when an unterminated string or bracket makes the rest opaque.
bool scan_logical_lines(std::string_view src, std::vector<LogicalLine>& out) {
  const std::size_t n = src.size();
  std::size_t pos = 0;
  while (pos < n) {
    LogicalLine ll;
    ll.begin = pos;
    std::size_t i = pos;
    while (i < n && (src[i] == ' ' || src[i] == '\t' || src[i] == '\f')) ++i;
    ll.indent = i - pos;
    int depth = 0;
    bool done = false;
    while (i < n && !done) {
      const char c = src[i];
      if (c == '\n') {
        ++i;
        if (depth == 0) done = true;
        continue;
      }
      if (c == '#') {
        while (i < n && src[i] != '\n') ++i;
        continue;
      }
      if (c == '\\' && i + 1 < n && src[i + 1] == '\n') {
        i += 2;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (!ll.significant) {
        ll.significant = true;
        ll.code_begin = i;
      }
      if (c == '"' || c == '\'') {
        std::size_t lit_begin = i;
        bool prefix_ok = true;
        while (lit_begin > ll.code_begin && std::isalpha(static_cast<unsigned char>(src[lit_begin - 1])))
          --lit_begin;
        if (lit_begin < i && lit_begin > 0 && is_ident(src[lit_begin - 1])) lit_begin = i;
        for (std::size_t k = lit_begin; k < i; ++k) {
          const char p = static_cast<char>(std::tolower(static_cast<unsigned char>(src[k])));
          if (p != 'r' && p != 'u') prefix_ok = false;
        }
        const bool triple = i + 2 < n && src[i + 1] == c && src[i + 2] == c;
        std::size_t j = i + (triple ? 3 : 1);
        bool closed = false;
        while (j < n) {
          if (src[j] == '\\') {
            j += 2;
            continue;
          }
          if (!triple && src[j] == '\n') break;
          if (src[j] == c && (!triple || (j + 2 < n && src[j + 1] == c && src[j + 2] == c))) {
            j += triple ? 3 : 1;
            closed = true;
            break;
          }
          ++j;
        }
        if (!closed) return false;
        if (ll.literals++ == 0) {
          ll.literal_begin = lit_begin;
          ll.literal_end = j;
          ll.docstring_prefix_ok = prefix_ok;
        }
        i = j;
        ll.code_end = j;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
      ++i;
      ll.code_end = i;
    }
    if (!done && depth > 0) return false;
    ll.end = i;
    out.push_back(ll);
    pos = i;
  }
  return true;
}

bool is_string_statement(const LogicalLine& ll) {
  return ll.significant && ll.literals == 1 && ll.docstring_prefix_ok &&
         ll.literal_begin == ll.code_begin && ll.literal_end == ll.code_end;
}

bool opens_definition(std::string_view src, const LogicalLine& ll) {
  if (!ll.significant || ll.code_end == 0 || src[ll.code_end - 1] != ':') return false;
  auto code = src.substr(ll.code_begin, ll.code_end - ll.code_begin);
  if (text::starts_with(code, "async")) {
    code = text::trim_left(code.substr(5));
  }
  auto keyword = [&](std::string_view kw) {
    return text::starts_with(code, kw) && code.size() > kw.size() &&
           std::isspace(static_cast<unsigned char>(code[kw.size()]));
  };
  return keyword("def") || keyword("class");
}

}  // namespace

std::string strip_docstrings(std::string_view source) {
  std::vector<LogicalLine> lines;
  const bool complete = scan_logical_lines(source, lines);
  if (!complete) {
    // Everything after the last good logical line is opaque and kept as is.
    LogicalLine rest;
    rest.begin = lines.empty() ? 0 : lines.back().end;
    rest.end = source.size();
    rest.significant = true;
    rest.indent = std::numeric_limits<std::size_t>::max();
    lines.push_back(rest);
  }

  std::string out;
  out.reserve(source.size());
  bool expect = true;   // at the start of a module / def / class body
  bool top_level = true;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& ll = lines[k];
    const auto raw = source.substr(ll.begin, ll.end - ll.begin);
    if (!ll.significant) {
      out.append(raw);
      continue;
    }
    if (expect && is_string_statement(ll)) {
      // Strip every leading string statement so that a second pass is a no-op.
      std::size_t last = k;
      for (std::size_t m = k + 1; m < lines.size(); ++m) {
        if (!lines[m].significant) continue;
        if (lines[m].indent == ll.indent && is_string_statement(lines[m])) {
          last = m;
          continue;
        }
        break;
      }
      std::size_t next = last + 1;
      while (next < lines.size() && !lines[next].significant) ++next;
      const bool body_empty =
          !top_level && (next == lines.size() || lines[next].indent < ll.indent);
      if (body_empty) {
        const auto& tail = lines[last];
        const bool newline = tail.end > tail.begin && source[tail.end - 1] == '\n';
        out.append(source.substr(ll.begin, ll.indent));
        out.append(newline ? "pass\n" : "pass");
      }
      // Comments between stripped docstrings are dropped with them.
      k = last;
      expect = false;
      top_level = false;
      continue;
    }
    out.append(raw);
    expect = opens_definition(source, ll);
    top_level = false;
  }
  return out;
}

BenchmarkTask truncate_context(BenchmarkTask task, std::size_t prefix_keep,
                               std::size_t suffix_keep) {
  const auto pre = text::split_lines(task.prefix);
  if (pre.size() > prefix_keep) task.prefix = text::join(pre, pre.size() - prefix_keep, pre.size());
  const auto suf = text::split_lines(task.suffix);
  if (suf.size() > suffix_keep) task.suffix = text::join(suf, 0, suffix_keep);
  return task;
}

double z_score(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidInput("confidence must lie in (0, 1)");
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 1.0 - (1.0 - confidence) / 2.0);
}

std::uint64_t sample_size(std::uint64_t population, double confidence, double margin,
                          double proportion) {
  if (population < 1) throw InvalidInput("sample_size: population must be >= 1");
  if (!(margin > 0.0 && margin < 1.0)) throw InvalidInput("sample_size: margin must lie in (0, 1)");
  if (!(proportion >= 0.0 && proportion <= 1.0))
    throw InvalidInput("sample_size: proportion must lie in [0, 1]");
  const double z = z_score(confidence);
  const double n0 = z * z * proportion * (1.0 - proportion) / (margin * margin);
  const auto N = static_cast<double>(population);
  const double corrected = n0 * N / (N + n0 - 1.0);
  // The epsilon absorbs rounding in exact cases such as N = 1 (n = 1).
  const auto n = static_cast<std::uint64_t>(std::ceil(corrected - 1e-9));
  return std::clamp<std::uint64_t>(n, 1, population);
}

SamplingPlan plan_sample(std::uint64_t population, double confidence, double margin,
                         double proportion) {
  return {population, confidence, margin, proportion,
          sample_size(population, confidence, margin, proportion)};
}

std::vector<BenchmarkTask> draw_subset(const std::vector<BenchmarkTask>& tasks, std::size_t n,
                                       std::uint64_t seed) {
  if (n > tasks.size())
    throw InvalidInput("draw_subset: requested " + std::to_string(n) + " of " +
                       std::to_string(tasks.size()) + " tasks");
  SeededRng rng(seed);
  auto order = rng.permutation(tasks.size());
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<BenchmarkTask> out;
  out.reserve(n);
  for (auto i : order) out.push_back(tasks[i]);
  return out;
}

AttachReport attach_instructions(std::vector<BenchmarkTask> tasks, synth::SynthBackend& backend,
                                 int retries, std::size_t max_in_flight) {
  std::vector<corpus::FimTriplet> triplets;
  triplets.reserve(tasks.size());
  for (const auto& t : tasks) triplets.push_back(t.triplet());
  auto batch = synth::synthesize_batch(backend, triplets, retries, max_in_flight);

  AttachReport report;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& t = tasks[i];
    t.instruction.reset();
    if (!batch.errors[i].empty()) {
      report.failed.emplace_back(t.task_id, batch.errors[i]);
    } else if (batch.results[i].accepted()) {
      t.instruction = batch.results[i].record->instruction;
    } else {
      report.rejected.push_back(t.task_id);
    }
  }
  report.tasks = std::move(tasks);
  return report;
}

nlohmann::json to_json(const BenchmarkTask& task) {
  nlohmann::json j;
  j["task_id"] = task.task_id;
  j["origin"] = std::string(to_string(task.origin));
  j["prefix"] = task.prefix;
  j["suffix"] = task.suffix;
  j["canonical_middle"] = task.canonical_middle;
  j["tests"] = task.tests;
  if (task.instruction) j["instruction"] = *task.instruction;
  j["language"] = task.language;
  return j;
}

BenchmarkTask task_from_json(const nlohmann::json& j, const std::string& where) {
  BenchmarkTask t;
  t.task_id = jsonl::required_string(j, "task_id", where);
  t.prefix = jsonl::required_string(j, "prefix", where);
  t.suffix = jsonl::required_string(j, "suffix", where);
  t.canonical_middle = jsonl::required_string(j, "canonical_middle", where);
  t.tests = jsonl::required_string(j, "tests", where);
  t.instruction = jsonl::optional_string(j, "instruction", where);
  if (auto o = jsonl::optional_string(j, "origin", where)) t.origin = parse_origin(*o);
  t.language = jsonl::optional_string(j, "language", where).value_or("python");
  return t;
}

std::vector<BenchmarkTask> read_tasks_from(std::string_view content) {
  std::vector<BenchmarkTask> out;
  jsonl::for_each_record(content, [&](const nlohmann::json& j, const std::string& where) {
    out.push_back(task_from_json(j, where));
  });
  return out;
}

std::vector<BenchmarkTask> read_tasks(const std::filesystem::path& path) {
  return read_tasks_from(jsonl::read_file(path));
}

std::string HumanEvalProblem::test_program() const {
  return test + "\n\ncheck(" + entry_point + ")\n";
}

std::vector<HumanEvalProblem> read_humaneval(std::string_view content) {
  std::vector<HumanEvalProblem> out;
  jsonl::for_each_record(content, [&](const nlohmann::json& j, const std::string& where) {
    HumanEvalProblem p;
    p.task_id = jsonl::required_string(j, "task_id", where);
    p.prompt = jsonl::required_string(j, "prompt", where);
    p.canonical_solution = jsonl::required_string(j, "canonical_solution", where);
    p.test = jsonl::required_string(j, "test", where);
    p.entry_point = jsonl::required_string(j, "entry_point", where);
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace ifim::bench
