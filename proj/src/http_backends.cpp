#include "ifim/http_backends.hpp"

#include <cstdlib>

#include <httplib.h>

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"

namespace ifim::http {

Endpoint Endpoint::from_env(std::string model) {
  Endpoint e;
  const char* base = std::getenv("IFIM_API_BASE");
  const char* key = std::getenv("IFIM_API_KEY");
  e.base_url = base != nullptr ? base : "https://api.openai.com/v1";
  e.api_key = key != nullptr ? key : "";
  e.model = std::move(model);
  return e;
}

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidInput("URL without scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

nlohmann::json chat_request_body(const std::string& model, const std::string& system,
                                 const std::string& user) {
  return {{"model", model},
          {"messages",
           nlohmann::json::array({{{"role", "system"}, {"content", system}},
                                  {{"role", "user"}, {"content", user}}})}};
}

nlohmann::json completion_request_body(const std::string& model, const std::string& prompt,
                                       int max_tokens, bool greedy,
                                       const std::vector<std::string>& stop) {
  nlohmann::json j = {{"model", model}, {"prompt", prompt}, {"max_tokens", max_tokens}};
  if (greedy) j["temperature"] = 0;
  // The OpenAI API accepts at most four stop strings.
  std::vector<std::string> s(stop.begin(), stop.begin() + std::min<std::size_t>(stop.size(), 4));
  if (!s.empty()) j["stop"] = s;
  return j;
}

namespace {

nlohmann::json parse_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("malformed response: ") + e.what());
  }
}

const nlohmann::json& first_choice(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw TransportError("response has no choices");
  return j["choices"][0];
}

}  // namespace

std::string parse_chat_response(const std::string& body) {
  const auto j = parse_body(body);
  const auto& c = first_choice(j);
  if (!c.contains("message") || !c["message"].contains("content") ||
      !c["message"]["content"].is_string())
    throw TransportError("chat response without message content");
  return c["message"]["content"].get<std::string>();
}

std::string parse_completion_response(const std::string& body) {
  const auto j = parse_body(body);
  const auto& c = first_choice(j);
  if (!c.contains("text") || !c["text"].is_string())
    throw TransportError("completion response without text");
  return c["text"].get<std::string>();
}

std::string post_json(const Endpoint& endpoint, const std::string& route,
                      const nlohmann::json& body) {
  const auto url = split_url(endpoint.base_url);
  httplib::Client client(url.scheme_host_port);
  if (!client.is_valid()) throw TransportError("unsupported endpoint " + endpoint.base_url);
  const auto secs = static_cast<time_t>(endpoint.timeout_s);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!endpoint.api_key.empty())
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  const auto res = client.Post(url.path + route, headers, jsonl::dump(body), "application/json");
  if (!res) throw TransportError("POST " + route + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("POST " + route + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

ChatSynthBackend::ChatSynthBackend(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string ChatSynthBackend::name() const { return "chat:" + endpoint_.model + "(provider-defaults)"; }

std::string ChatSynthBackend::complete(std::string_view system, std::string_view user) {
  const auto body = chat_request_body(endpoint_.model, std::string(system), std::string(user));
  return parse_chat_response(post_json(endpoint_, "/chat/completions", body));
}

CompletionsBackend::CompletionsBackend(Endpoint endpoint, std::vector<std::string> stop)
    : endpoint_(std::move(endpoint)), stop_(std::move(stop)) {}

std::string CompletionsBackend::generate(std::string_view input, int max_new_tokens, bool greedy) {
  const auto body =
      completion_request_body(endpoint_.model, std::string(input), max_new_tokens, greedy, stop_);
  return parse_completion_response(post_json(endpoint_, "/completions", body));
}

}  // namespace ifim::http
