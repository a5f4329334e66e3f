#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ifim/corpus.hpp"

namespace ifim::synth {

extern const std::string_view kSystemPrompt;

struct PromptPair {
  std::string system;
  std::string user;
};

/// Wraps the middle in <explain></explain> and embeds the whole code in the
/// one-sentence request. Throws if the middle already carries the tags.
PromptPair build_prompts(const corpus::FimTriplet& triplet);

/// Accepts a single-line text with at most one sentence terminator. Periods
/// inside "e.g.", "i.e.", "etc.", "vs." or next to a digit are ignored and a
/// run such as "?!" or "..." counts once.
bool one_sentence_filter(std::string_view candidate);

/// Trims whitespace, surrounding markdown fences and surrounding quotes.
std::string clean_response(std::string_view raw);

/// Text-generation backend used to write instructions. complete() throws
/// TransportError when the call itself fails.
class SynthBackend {
 public:
  virtual ~SynthBackend() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(std::string_view system, std::string_view user) = 0;
  /// Whether complete() may be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

/// Replays a fixed transcript. Each step is either a response or a transport
/// failure; the last step repeats once the transcript is exhausted.
class ScriptedSynthBackend final : public SynthBackend {
 public:
  struct Failure {
    std::string message;
  };
  using Step = std::variant<std::string, Failure>;

  explicit ScriptedSynthBackend(std::vector<Step> steps, std::string label = "scripted");

  std::string name() const override { return label_; }
  std::string complete(std::string_view system, std::string_view user) override;
  std::size_t calls() const { return calls_; }

 private:
  std::vector<Step> steps_;
  std::string label_;
  std::size_t calls_ = 0;
};

/// Offline deterministic backend: the answer is a pure function of the
/// prompt, so it is safe to call concurrently.
class MockSynthBackend final : public SynthBackend {
 public:
  using Responder = std::function<std::string(std::string_view user)>;

  MockSynthBackend();
  explicit MockSynthBackend(Responder responder, std::string label = "mock");

  std::string name() const override { return label_; }
  std::string complete(std::string_view system, std::string_view user) override;
  bool concurrent() const override { return true; }

 private:
  Responder responder_;
  std::string label_;
};

struct SynthResult {
  std::optional<corpus::InstructionRecord> record;
  int attempts = 0;
  std::string last_response;

  bool accepted() const { return record.has_value(); }
};

/// Prompts, cleans and filters, retrying up to `retries` more times on a
/// filter rejection or transport failure. A final filter rejection returns an
/// empty record; a final transport failure throws TransportError.
SynthResult synthesize_instruction(SynthBackend& backend, const corpus::FimTriplet& triplet,
                                   int retries = 2);

struct BatchOutcome {
  std::vector<SynthResult> results;
  /// Per-item error (transport failure or bad triplet), empty on success.
  std::vector<std::string> errors;
};

/// Synthesizes every triplet with at most `max_in_flight` outstanding backend
/// calls. Output order follows input order. Backends that are not concurrent
/// are driven from a single thread.
BatchOutcome synthesize_batch(SynthBackend& backend,
                              const std::vector<corpus::FimTriplet>& triplets,
                              int retries = 2, std::size_t max_in_flight = 8);

}  // namespace ifim::synth
