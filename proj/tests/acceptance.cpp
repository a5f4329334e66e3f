// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ifim/assemble.hpp"
#include "ifim/bench.hpp"
#include "ifim/corpus.hpp"
#include "ifim/eval.hpp"
#include "ifim/format.hpp"
#include "ifim/parallel.hpp"
#include "ifim/profile.hpp"
#include "ifim/synth.hpp"
#include "ifim/text.hpp"
#include "test_util.hpp"

using namespace ifim;
using format::BaseMode;
using format::Component;
using format::IfimMode;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::string why;

  void expect(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const format::SentinelSet kS;

Check ac1() {
  Check c;
  const corpus::FimTriplet t{"for i in ", "range(10):", " print(i)", "python", "ex"};
  const auto t0 = Clock::now();
  const auto r = format::render_fim(t, BaseMode::PSM, kS);
  const double ms = ms_since(t0);
  c.expect(r.layout() == "<PRE>for i in <SUF> print(i)<MID>", "layout mismatch: " + r.layout());
  c.expect(r.target == "range(10):", "target mismatch");
  c.expect(ms < 1.0, "took " + std::to_string(ms) + " ms");
  return c;
}

bool has_sentinel(const std::string& s) {
  for (const auto* tok : {"<PRE>", "<SUF>", "<MID>", "<INS>"})
    if (s.find(tok) != std::string::npos) return true;
  return false;
}

Check ac2() {
  Check c;
  std::mt19937_64 g(2024);
  const auto t0 = Clock::now();
  int done = 0;
  while (done < 1000) {
    const auto p = testing::random_text(g, 40, "ab <>PREMIDSUFN\n\t");
    const auto m = testing::random_text(g, 40, "ab <>PREMIDSUFN\n\t");
    const auto s = testing::random_text(g, 40, "ab <>PREMIDSUFN\n\t");
    const auto i = "x" + testing::random_text(g, 30, "ab <>PREMIDSUFN\t");
    if (has_sentinel(p) || has_sentinel(m) || has_sentinel(s) || has_sentinel(i)) continue;
    ++done;
    const corpus::FimTriplet t{p, m, s, "python", "r"};
    const corpus::InstructionRecord rec{t, i, ""};
    struct Case {
      format::Mode mode;
      std::string literal;
      bool with_ins;
    };
    const std::vector<Case> cases = {
        {BaseMode::PSM, "<PRE>" + p + "<SUF>" + s + "<MID>", false},
        {BaseMode::PMS, "<PRE>" + p + "<MID>" + s + "<SUF>", false},
        {BaseMode::SPM, "<SUF>" + s + "<PRE>" + p + "<MID>", false},
        {IfimMode{BaseMode::PSM, 2}, "<PRE>" + p + "<SUF>" + s + "<INS>" + i + "<MID>", true},
        {IfimMode{BaseMode::PMS, 1}, "<PRE>" + p + "<INS>" + i + "<MID>" + s + "<SUF>", true},
        {IfimMode{BaseMode::SPM, 2}, "<SUF>" + s + "<PRE>" + p + "<INS>" + i + "<MID>", true},
    };
    for (const auto& k : cases) {
      const auto r = k.with_ins ? format::render_ifim(rec, std::get<IfimMode>(k.mode), kS)
                                : format::render_fim(t, std::get<BaseMode>(k.mode), kS);
      const auto name = format::mode_name(k.mode);
      c.expect(r.layout() == k.literal, name + " layout differs from its template");
      c.expect(r.target == m, name + " target differs");
      const auto back = format::parse_layout(r.layout(), k.mode, kS);
      c.expect(back.prefix == p && back.suffix == s, name + " did not parse back");
      c.expect(k.with_ins ? back.instruction == i : !back.instruction.has_value(),
               name + " instruction did not parse back");
    }
  }
  const double ms = ms_since(t0);
  c.expect(ms < 1000.0, "took " + std::to_string(ms) + " ms");
  return c;
}

Check ac3() {
  Check c;
  auto names = [](BaseMode b) {
    std::string out;
    for (const auto& m : format::enumerate_ifim_modes(b)) out += (out.empty() ? "" : ", ") + m.name();
    return out;
  };
  c.expect(names(BaseMode::PSM) == "IPSM, PISM, PSIM, PSMI", "PSM list: " + names(BaseMode::PSM));
  c.expect(names(BaseMode::PMS) == "IPMS, PIMS, PMIS, PMSI", "PMS list: " + names(BaseMode::PMS));
  c.expect(format::default_ifim_mode(BaseMode::PSM).name() == "PSIM", "PSM default");
  c.expect(format::default_ifim_mode(BaseMode::PMS).name() == "PIMS", "PMS default");
  c.expect(format::default_ifim_mode(BaseMode::SPM).name() == "SPIM", "SPM default");
  for (auto b : {BaseMode::PSM, BaseMode::PMS, BaseMode::SPM}) {
    for (const auto& m : format::enumerate_ifim_modes(b)) {
      auto comps = format::components(m);
      std::erase(comps, Component::I);
      c.expect(comps == format::components(b), m.name() + " minus I is not its base");
      auto name = m.name();
      name.erase(name.find('I'), 1);
      c.expect(name == format::to_string(b), m.name() + " name minus I is not its base");
    }
  }
  return c;
}

Check ac4() {
  Check c;
  c.expect(bench::sample_size(1640, 0.95, 0.05, 0.5) == 312, "N=1640 gives " + std::to_string(bench::sample_size(1640)));
  std::uint64_t prev = 0;
  for (std::uint64_t n = 1; n <= 100000; ++n) {
    const auto v = bench::sample_size(n);
    c.expect(v >= prev, "not monotone at N=" + std::to_string(n));
    prev = v;
  }
  c.expect(prev <= 385, "exceeds 385");
  c.expect(bench::sample_size(1'000'000'000'000ULL) == 385, "asymptote is not 385");
  return c;
}

Check ac5() {
  Check c;
  std::mt19937_64 g(55);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const corpus::CodeSample sample{"s" + std::to_string(k), "python", testing::random_source(g, 40), ""};
    const auto t = corpus::select_middle_span(sample, g());
    const auto lines = text::split_lines(t.middle).size();
    if (t.joined() != sample.code || lines < 1 || lines > 3) ++violations;
  }
  c.expect(violations == 0, std::to_string(violations) + " violations");
  return c;
}

Check ac6() {
  Check c;
  std::vector<corpus::InstructionRecord> pool;
  for (int k = 0; k < 1000; ++k)
    pool.push_back({{"p" + std::to_string(k) + "\n", "m\n", "s\n", "python", "r" + std::to_string(k)},
                    "Do thing " + std::to_string(k) + ".", "t"});
  for (double ratio : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (std::size_t n = 1; n <= 1000; ++n) {
      const std::vector<corpus::InstructionRecord> recs(pool.begin(), pool.begin() + n);
      const auto mixed = corpus::mix_ratio(recs, ratio, n);
      std::size_t ifim = 0;
      for (const auto& r : mixed.records) ifim += r.tag == corpus::Tag::ifim;
      const auto expected = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
      c.expect(ifim == expected, "ratio " + std::to_string(ratio) + " n=" + std::to_string(n));
      if (ratio == 0.0 && (n % 100 == 0 || n < 5)) {
        const auto ex = parallel::build_training_examples(mixed.records, BaseMode::PSM, default_profile(),
                                                          parallel::Exec::serial);
        for (const auto& e : ex)
          c.expect((e.input + e.input_after + e.target).find("<INS>") == std::string::npos,
                   "<INS> at ratio 0");
      }
    }
  }
  return c;
}

Check ac7() {
  Check c;
  using V = std::vector<Component>;
  c.expect(format::cache_survival(format::parse_ifim_mode("IPSM")).empty(), "IPSM");
  c.expect(format::cache_survival(format::parse_ifim_mode("PSIM")) == V{Component::P, Component::S}, "PSIM");
  c.expect(format::cache_survival(format::parse_ifim_mode("SPIM")) == V{Component::S, Component::P}, "SPIM");
  c.expect(format::cache_survival(format::parse_ifim_mode("PIMS")) == V{Component::P}, "PIMS");
  return c;
}

std::vector<bench::BenchmarkTask> fifty_tasks() {
  std::vector<bench::BenchmarkTask> tasks;
  for (int p = 0; p < 5; ++p) {
    std::string sol;
    for (int k = 0; k < 9; ++k) sol += "    x = x + " + std::to_string(p + k) + "\n";
    sol += "    return x\n";
    int expect = 1;
    for (int k = 0; k < 9; ++k) expect += p + k;
    const auto name = "g" + std::to_string(p);
    const auto d = bench::derive_single_line_tasks(
        "P/" + std::to_string(p), sol, "assert " + name + "(1) == " + std::to_string(expect) + "\n",
        "def " + name + "(x):\n");
    tasks.insert(tasks.end(), d.begin(), d.end());
  }
  return tasks;
}

Check ac8() {
  Check c;
  const auto t0 = Clock::now();
  const auto tasks = fifty_tasks();
  c.expect(tasks.size() == 50, "derived " + std::to_string(tasks.size()) + " tasks");
  eval::EvalConfig cfg;
  eval::OracleBackend oracle(tasks, cfg);
  const auto clean = eval::run_benchmark(oracle, tasks, cfg);
  c.expect(eval::format_percent(eval::pass_at_1(clean)) == "100.0",
           "oracle Pass@1 " + eval::format_percent(eval::pass_at_1(clean)));

  std::map<std::string, std::string> answers;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    answers[tasks[i].task_id] = i % 5 == 0 ? "    raise SystemExit(3)\n" : tasks[i].canonical_middle;
  auto corrupted = eval::ScriptedBackend::for_tasks(tasks, cfg, answers);
  const auto bad = eval::run_benchmark(corrupted, tasks, cfg);
  c.expect(eval::format_percent(eval::pass_at_1(bad)) == "80.0",
           "corrupted Pass@1 " + eval::format_percent(eval::pass_at_1(bad)));
  for (std::size_t i = 0; i < bad.size(); ++i)
    c.expect(bad[i].passed == (i % 5 != 0), "wrong task graded: " + bad[i].task_id);

  const double timeout = 2.0;
  const auto loop = eval::execute_candidate(tasks[3], "    while True:\n        pass\n", timeout);
  c.expect(loop.failure_kind == eval::FailureKind::timeout, "loop not graded timeout");
  c.expect(loop.wall_time_ms <= (timeout + 1.0) * 1000.0, "loop killed after " + std::to_string(loop.wall_time_ms) + " ms");
  c.expect(ms_since(t0) < 120000.0, "suite took too long");
  return c;
}

Check ac9() {
  Check c;
  const std::string before = "def positives(xs):\n";
  const std::string line = "    #!filter out negative numbers\n";
  const std::string after = "    return xs\n";
  const auto src = before + line + after;
  const auto req = assemble::parse_request({src, before.size() + line.size(), "python"}, default_marker_table());
  c.expect(req.instruction == "filter out negative numbers", "instruction not extracted");
  c.expect(req.prefix == before, "instruction line not removed");
  c.expect(req.prefix + req.instruction_line + req.suffix == src, "reconstruction not byte-exact");
  auto plain = req;
  plain.instruction.reset();
  const auto profile = default_profile();
  const corpus::FimTriplet t{plain.prefix, "", plain.suffix, "python", ""};
  c.expect(assemble::assemble_input(plain, profile) == format::render_fim(t, profile.base, profile.sentinels).layout(),
           "no-instruction input differs from plain FIM");
  c.expect(assemble::assemble_input(req, profile) ==
               "<PRE>" + before + "<SUF>" + after + "<INS>filter out negative numbers<MID>",
           "instruction input differs from PSIM");
  return c;
}

Check ac10() {
  Check c;
  const std::vector<std::pair<std::string, bool>> fixtures = {
      {"Filter out negative numbers.", true},
      {"Return the sum of the list", true},
      {"Compute the factorial of n recursively.", true},
      {"Sort the list. Then return it.", false},
      {"Parse the header. Validate it. Return the body.", false},
      {"Read the file! Close it.", false},
      {"Is the list empty? Return early.", false},
      {"Compute, e.g., the running sum of values", true},
      {"Handle lists, tuples, etc.", true},
      {"Compare a vs. b and return the larger.", true},
      {"Normalize the input, i.e. lowercase it.", true},
      {"Round the value to 2.5 units.", true},
      {"Return version 3.10 or later.", true},
      {"Check whether the input is valid?", true},
      {"Wait...", true},
      {"Retry up to 3 times. Then give up.", false},
      {"Open the socket.\nSend the payload.", false},
      {"Return x.\n", true},
      {"", false},
      {"   ", false},
      {"Return the maximum value.  ", true},
      {"Use E.G. style abbreviations, e.g. this one.", true},
      {"Validate the email address, i.e., check its format.", true},
      {"Merge the dicts. Etc.", true},  // "Etc." is exempt, one terminator left
      {"Compute the mean. Compute the variance.", false},
      {"Increment the counter by 1.", true},
      {"Return True if done!", true},
      {"Stop. Now.", false},
      {"Multiply a by b, then add c, i.e. compute a*b+c.", true},
      {"Return the first element vs. the last element.", true},
  };
  if (fixtures.size() != 30) c.expect(false, "fixture count");
  for (const auto& [text, expected] : fixtures)
    c.expect(synth::one_sentence_filter(text) == expected, "misclassified: \"" + text + "\"");

  const std::string system =
      "You are a senior software engineer. When given a code snippet containing sections marked with "
      "<explain></explain> tags, write a single, concise instruction that explicitly describes the "
      "functional purpose of the code to be implemented within the tagged area. Focus on what needs to be "
      "achieved (e.g., inputs, outputs, logic) without prescribing how to implement it (e.g., specific "
      "methods, libraries). Ensure clarity and brevity so a developer can directly translate the "
      "instruction into code. Only write the instruction, no other text.";
  const corpus::FimTriplet t{"def f(xs):\n", "    return [x for x in xs if x >= 0]\n", "", "python", "x"};
  const auto prompts = synth::build_prompts(t);
  c.expect(prompts.system == system, "system prompt differs");
  c.expect(prompts.user ==
               "Explain the code in the <explain></explain> tags using one simple sentence: ```python\n"
               "def f(xs):\n<explain>    return [x for x in xs if x >= 0]\n</explain>\n```",
           "user prompt differs");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"AC1 template exactness", ac1},   {"AC2 layout suite", ac2},
      {"AC3 mode algebra", ac3},         {"AC4 sampling formula", ac4},
      {"AC5 corpus round-trip", ac5},    {"AC6 mixer exactness", ac6},
      {"AC7 cache analysis", ac7},       {"AC8 harness soundness", ac8},
      {"AC9 assembly protocol", ac9},    {"AC10 synthesis filter", ac10},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.why = std::string("exception: ") + e.what();
    }
    std::printf("%s %s (%.1f ms)%s%s\n", c.ok ? "PASS" : "FAIL", name.c_str(), ms_since(t0),
                c.ok ? "" : ": ", c.why.c_str());
    failed += !c.ok;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
