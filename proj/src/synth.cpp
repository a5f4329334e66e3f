#include "ifim/synth.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <thread>

#include "ifim/error.hpp"
#include "ifim/text.hpp"

namespace ifim::synth {

const std::string_view kSystemPrompt =
    "You are a senior software engineer. When given a code snippet containing sections "
    "marked with <explain></explain> tags, write a single, concise instruction that "
    "explicitly describes the functional purpose of the code to be implemented within the "
    "tagged area. Focus on what needs to be achieved (e.g., inputs, outputs, logic) without "
    "prescribing how to implement it (e.g., specific methods, libraries). Ensure clarity and "
    "brevity so a developer can directly translate the instruction into code. Only write the "
    "instruction, no other text.";

namespace {

constexpr std::string_view kOpenTag = "<explain>";
constexpr std::string_view kCloseTag = "</explain>";
constexpr std::string_view kUserLead =
    "Explain the code in the <explain></explain> tags using one simple sentence: ";

constexpr std::array<std::string_view, 4> kAbbreviations = {"e.g.", "i.e.", "etc.", "vs."};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Marks every character belonging to a whole-word abbreviation occurrence.
std::vector<bool> abbreviation_mask(std::string_view s) {
  std::vector<bool> mask(s.size(), false);
  const auto lower = text::to_lower(s);
  for (auto abbr : kAbbreviations) {
    std::size_t pos = 0;
    while ((pos = lower.find(abbr, pos)) != std::string::npos) {
      if (pos == 0 || !is_word_char(lower[pos - 1]))
        std::fill(mask.begin() + static_cast<std::ptrdiff_t>(pos),
                  mask.begin() + static_cast<std::ptrdiff_t>(pos + abbr.size()), true);
      pos += abbr.size();
    }
  }
  return mask;
}

bool digit_at(std::string_view s, std::size_t i) {
  return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) != 0;
}

}  // namespace

PromptPair build_prompts(const corpus::FimTriplet& triplet) {
  if (triplet.middle.find(kOpenTag) != std::string::npos ||
      triplet.middle.find(kCloseTag) != std::string::npos)
    throw InvalidInput("build_prompts: middle already contains <explain> markers");
  PromptPair p;
  p.system = std::string(kSystemPrompt);
  p.user.reserve(kUserLead.size() + triplet.prefix.size() + triplet.middle.size() +
                 triplet.suffix.size() + 64);
  p.user.append(kUserLead);
  p.user.append("```").append(triplet.language).append("\n");
  p.user.append(triplet.prefix);
  p.user.append(kOpenTag).append(triplet.middle).append(kCloseTag);
  p.user.append(triplet.suffix);
  p.user.append("\n```");
  return p;
}

bool one_sentence_filter(std::string_view candidate) {
  const auto s = text::trim(candidate);
  if (s.empty()) return false;
  if (s.find_first_of("\r\n") != std::string_view::npos) return false;

  const auto exempt = abbreviation_mask(s);
  int terminators = 0;
  bool in_run = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    bool counts = is_terminator(c) && !exempt[i];
    if (counts && c == '.' && ((i > 0 && digit_at(s, i - 1)) || digit_at(s, i + 1)))
      counts = false;
    if (counts) {
      if (!in_run) ++terminators;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return terminators <= 1;
}

std::string clean_response(std::string_view raw) {
  auto s = text::trim(raw);
  if (text::starts_with(s, "```")) {
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? s.substr(3) : s.substr(nl + 1);
    if (s.size() >= 3 && s.substr(s.size() - 3) == "```") s.remove_suffix(3);
    s = text::trim(s);
  }
  // Quote pairs, including the UTF-8 curly double quotes.
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kQuotes = {{
      {"\"", "\""}, {"'", "'"}, {"`", "`"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}}};
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const auto& [open, close] : kQuotes) {
      if (s.size() >= open.size() + close.size() && text::starts_with(s, open) &&
          s.substr(s.size() - close.size()) == close) {
        s = text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        stripped = true;
      }
    }
  }
  return std::string(s);
}

ScriptedSynthBackend::ScriptedSynthBackend(std::vector<Step> steps, std::string label)
    : steps_(std::move(steps)), label_(std::move(label)) {
  if (steps_.empty()) throw InvalidInput("ScriptedSynthBackend needs at least one step");
}

std::string ScriptedSynthBackend::complete(std::string_view, std::string_view) {
  const auto& step = steps_[std::min(calls_, steps_.size() - 1)];
  ++calls_;
  if (const auto* f = std::get_if<Failure>(&step)) throw TransportError(f->message);
  return std::get<std::string>(step);
}

namespace {

std::string default_mock_response(std::string_view user) {
  std::string language = "code";
  const auto fence = user.find("```");
  if (fence != std::string_view::npos) {
    const auto nl = user.find('\n', fence);
    if (nl != std::string_view::npos && nl > fence + 3)
      language = std::string(user.substr(fence + 3, nl - fence - 3));
  }
  // The lead sentence names the tags too; only look inside the fence.
  const auto body = fence == std::string_view::npos ? 0 : fence;
  std::size_t lines = 0;
  const auto open = user.find(kOpenTag, body);
  const auto close = user.find(kCloseTag, body);
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    const auto middle = user.substr(open + kOpenTag.size(), close - open - kOpenTag.size());
    lines = text::split_lines(middle).size();
  }
  return "Complete the missing " + language + " code spanning " + std::to_string(lines) +
         (lines == 1 ? " line" : " lines");
}

}  // namespace

MockSynthBackend::MockSynthBackend() : MockSynthBackend(default_mock_response) {}

MockSynthBackend::MockSynthBackend(Responder responder, std::string label)
    : responder_(std::move(responder)), label_(std::move(label)) {}

std::string MockSynthBackend::complete(std::string_view, std::string_view user) {
  return responder_(user);
}

SynthResult synthesize_instruction(SynthBackend& backend, const corpus::FimTriplet& triplet,
                                   int retries) {
  const auto prompts = build_prompts(triplet);
  SynthResult result;
  std::string last_transport_error;
  const int budget = 1 + std::max(0, retries);
  for (int attempt = 0; attempt < budget; ++attempt) {
    ++result.attempts;
    std::string raw;
    try {
      raw = backend.complete(prompts.system, prompts.user);
    } catch (const TransportError& e) {
      last_transport_error = e.what();
      continue;
    }
    last_transport_error.clear();
    result.last_response = clean_response(raw);
    if (one_sentence_filter(result.last_response)) {
      result.record = corpus::InstructionRecord{triplet, result.last_response, backend.name()};
      return result;
    }
  }
  if (!last_transport_error.empty())
    throw TransportError("synthesis failed after " + std::to_string(result.attempts) +
                         " attempts: " + last_transport_error);
  return result;
}

BatchOutcome synthesize_batch(SynthBackend& backend,
                              const std::vector<corpus::FimTriplet>& triplets, int retries,
                              std::size_t max_in_flight) {
  BatchOutcome out;
  out.results.resize(triplets.size());
  out.errors.resize(triplets.size());

  auto run_one = [&](std::size_t i) {
    try {
      out.results[i] = synthesize_instruction(backend, triplets[i], retries);
    } catch (const Error& e) {
      out.errors[i] = e.what();
    }
  };

  const std::size_t workers =
      backend.concurrent() ? std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(triplets.size(), 1))
                           : 1;
  if (workers == 1) {
    for (std::size_t i = 0; i < triplets.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < triplets.size(); i = next++) run_one(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace ifim::synth
