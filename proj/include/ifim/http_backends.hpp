#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifim/eval.hpp"
#include "ifim/synth.hpp"

namespace ifim::http {

struct Endpoint {
  std::string base_url;  ///< e.g. https://api.openai.com/v1
  std::string api_key;
  std::string model;
  double timeout_s = 60.0;

  /// base_url from IFIM_API_BASE and api_key from IFIM_API_KEY.
  static Endpoint from_env(std::string model);
};

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;  ///< without trailing slash
};

SplitUrl split_url(const std::string& url);

/// Request bodies, exposed so the wire format can be tested offline.
nlohmann::json chat_request_body(const std::string& model, const std::string& system,
                                 const std::string& user);
nlohmann::json completion_request_body(const std::string& model, const std::string& prompt,
                                       int max_tokens, bool greedy,
                                       const std::vector<std::string>& stop);

/// First choice's message text; throws TransportError on a malformed body.
std::string parse_chat_response(const std::string& body);
std::string parse_completion_response(const std::string& body);

/// OpenAI-compatible /chat/completions client for instruction synthesis.
/// Sends no sampling parameters, so the provider defaults apply.
class ChatSynthBackend final : public synth::SynthBackend {
 public:
  explicit ChatSynthBackend(Endpoint endpoint);
  std::string name() const override;
  std::string complete(std::string_view system, std::string_view user) override;
  bool concurrent() const override { return true; }

 private:
  Endpoint endpoint_;
};

/// OpenAI-compatible /completions client (prompt in, text out) for
/// evaluation; stop strings are the sentinel literals plus end markers.
class CompletionsBackend final : public eval::CompletionBackend {
 public:
  CompletionsBackend(Endpoint endpoint, std::vector<std::string> stop);
  std::string name() const override { return endpoint_.model; }
  std::string generate(std::string_view input, int max_new_tokens, bool greedy) override;

 private:
  Endpoint endpoint_;
  std::vector<std::string> stop_;
};

/// POSTs JSON and returns the response body; non-2xx throws TransportError.
std::string post_json(const Endpoint& endpoint, const std::string& route,
                      const nlohmann::json& body);

}  // namespace ifim::http
