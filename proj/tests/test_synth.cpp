#include <doctest.h>

#include <atomic>
#include <thread>

#include "ifim/error.hpp"
#include "ifim/synth.hpp"

using namespace ifim;
using namespace ifim::synth;

namespace {

// Copied character for character from the published prompt box.
constexpr std::string_view kExpectedSystem =
    "You are a senior software engineer. When given a code snippet containing sections marked "
    "with <explain></explain> tags, write a single, concise instruction that explicitly "
    "describes the functional purpose of the code to be implemented within the tagged area. "
    "Focus on what needs to be achieved (e.g., inputs, outputs, logic) without prescribing how "
    "to implement it (e.g., specific methods, libraries). Ensure clarity and brevity so a "
    "developer can directly translate the instruction into code. Only write the instruction, "
    "no other text.";

corpus::FimTriplet abc() { return {"a=1\n", "b=2\n", "c=3\n", "python", "abc"}; }

}  // namespace

TEST_CASE("build_prompts uses the verbatim system prompt") {
  CHECK(build_prompts(abc()).system == kExpectedSystem);
  CHECK(kSystemPrompt == kExpectedSystem);
}

TEST_CASE("build_prompts wraps the middle in explain tags inside a language fence") {
  const auto p = build_prompts(abc());
  CHECK(p.user ==
        "Explain the code in the <explain></explain> tags using one simple sentence: "
        "```python\na=1\n<explain>b=2\n</explain>c=3\n\n```");
  CHECK(p.user.find("a=1\n<explain>b=2\n</explain>c=3\n") != std::string::npos);
}

TEST_CASE("build_prompts is pure") {
  const auto t = abc();
  const auto a = build_prompts(t);
  const auto b = build_prompts(t);
  CHECK(a.system == b.system);
  CHECK(a.user == b.user);
}

TEST_CASE("build_prompts rejects a middle that already carries the tags") {
  auto t = abc();
  t.middle = "x = '</explain>'\n";
  CHECK_THROWS_AS(build_prompts(t), InvalidInput);
  t.middle = "<explain>\n";
  CHECK_THROWS_AS(build_prompts(t), InvalidInput);
}

TEST_CASE("one_sentence_filter examples") {
  CHECK(one_sentence_filter("Filter out negative numbers."));
  CHECK_FALSE(one_sentence_filter("Sort the list. Then return it."));
  // "e.g." periods are exempt and no terminator remains: one sentence.
  CHECK(one_sentence_filter("Compute, e.g., the running sum of values"));
}

TEST_CASE("one_sentence_filter edge cases") {
  CHECK_FALSE(one_sentence_filter(""));
  CHECK_FALSE(one_sentence_filter("   \t "));
  CHECK_FALSE(one_sentence_filter("Return x.\nThen y"));
  CHECK(one_sentence_filter("  Return the maximum value.  "));
  CHECK(one_sentence_filter("Return the value rounded to 2.5 units"));
  CHECK(one_sentence_filter("Compare a vs. b and return the larger."));
  CHECK(one_sentence_filter("Handle lists, tuples, etc."));
  CHECK(one_sentence_filter("Is the input empty?"));
  CHECK(one_sentence_filter("Wait..."));
  CHECK_FALSE(one_sentence_filter("Done! Now return."));
  CHECK_FALSE(one_sentence_filter("Why? Because."));
  // "she.g." is not the abbreviation.
  CHECK_FALSE(one_sentence_filter("Read the.g. Write it."));
}

TEST_CASE("clean_response strips quotes and fences") {
  CHECK(clean_response("  \"Return the max.\"  ") == "Return the max.");
  CHECK(clean_response("```\nReturn the max.\n```") == "Return the max.");
  CHECK(clean_response("```text\n'Return the max.'\n```") == "Return the max.");
  CHECK(clean_response("\xE2\x80\x9CReturn it.\xE2\x80\x9D") == "Return it.");
  CHECK(clean_response("Return 'x' now") == "Return 'x' now");
}

TEST_CASE("synthesize_instruction accepts a single sentence") {
  ScriptedSynthBackend backend({std::string("Return the maximum value.")}, "script");
  const auto r = synthesize_instruction(backend, abc());
  REQUIRE(r.accepted());
  CHECK(r.record->instruction == "Return the maximum value.");
  CHECK(r.record->synthesizer == "script");
  CHECK(r.record->triplet == abc());
  CHECK(r.attempts == 1);
}

TEST_CASE("synthesize_instruction gives up after the retries") {
  ScriptedSynthBackend backend({std::string("Sort it. Then return it.")});
  const auto r = synthesize_instruction(backend, abc(), 2);
  CHECK_FALSE(r.accepted());
  CHECK(r.attempts == 3);
  CHECK(backend.calls() == 3);
}

TEST_CASE("synthesize_instruction retries a transport failure") {
  ScriptedSynthBackend backend(
      {ScriptedSynthBackend::Failure{"connection reset"}, std::string("Return the sum.")});
  const auto r = synthesize_instruction(backend, abc(), 2);
  REQUIRE(r.accepted());
  CHECK(r.attempts == 2);  // one retry consumed
  CHECK(r.record->instruction == "Return the sum.");
}

TEST_CASE("synthesize_instruction surfaces persistent transport failures") {
  ScriptedSynthBackend backend({ScriptedSynthBackend::Failure{"down"}});
  CHECK_THROWS_AS(synthesize_instruction(backend, abc(), 1), TransportError);
  CHECK(backend.calls() == 2);
}

TEST_CASE("MockSynthBackend answers deterministically and passes the filter") {
  MockSynthBackend mock;
  const auto p = build_prompts(abc());
  const auto a = mock.complete(p.system, p.user);
  CHECK(a == "Complete the missing python code spanning 1 line");
  CHECK(one_sentence_filter(a));
  CHECK(mock.complete(p.system, p.user) == a);
}

TEST_CASE("synthesize_batch keeps input order under concurrency") {
  std::atomic<int> in_flight{0}, peak{0};
  MockSynthBackend slow(
      [&](std::string_view user) {
        const int now = ++in_flight;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --in_flight;
        const auto open = user.find("<explain>", user.find("```"));
        return "Produce " + std::string(user.substr(open + 9, 3));
      },
      "slow");
  std::vector<corpus::FimTriplet> triplets;
  for (int i = 0; i < 40; ++i) {
    char mid[8];
    std::snprintf(mid, sizeof mid, "%03d\n", i);
    triplets.push_back({"", mid, "", "python", std::to_string(i)});
  }
  const auto out = synthesize_batch(slow, triplets, 0, 4);
  REQUIRE(out.results.size() == triplets.size());
  for (int i = 0; i < 40; ++i) {
    char want[16];
    std::snprintf(want, sizeof want, "Produce %03d", i);
    REQUIRE(out.results[i].accepted());
    CHECK(out.results[i].record->instruction == want);
    CHECK(out.errors[i].empty());
  }
  CHECK(peak.load() <= 4);
}

TEST_CASE("synthesize_batch records per-item errors") {
  std::vector<corpus::FimTriplet> triplets = {abc(), {"", "</explain>", "", "python", "bad"}};
  ScriptedSynthBackend backend({std::string("Return it.")});
  const auto out = synthesize_batch(backend, triplets);
  CHECK(out.results[0].accepted());
  CHECK(out.errors[0].empty());
  CHECK_FALSE(out.errors[1].empty());
}
