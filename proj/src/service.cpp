#include "ifim/service.hpp"

#include <mutex>

#include <httplib.h>

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"

namespace ifim::service {

struct InfillService::Impl {
  httplib::Server server;
  mutable std::mutex backend_mutex;
};

namespace {

Reply error_reply(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

std::string string_field(const nlohmann::json& j, const char* key) {
  return jsonl::required_string(j, key, "request");
}

}  // namespace

InfillService::InfillService(std::vector<ModelProfile> profiles,
                             std::shared_ptr<eval::CompletionBackend> backend, int max_new_tokens)
    : profiles_(std::move(profiles)),
      backend_(std::move(backend)),
      max_new_tokens_(max_new_tokens),
      impl_(std::make_unique<Impl>()) {
  if (profiles_.empty()) throw InvalidInput("the infill service needs at least one model profile");

  impl_->server.Post("/v1/infill", [this](const httplib::Request& req, httplib::Response& res) {
    const auto reply = infill(req.body);
    res.status = reply.status;
    res.set_content(jsonl::dump(reply.body), "application/json");
  });
  impl_->server.Get("/v1/profiles", [this](const httplib::Request&, httplib::Response& res) {
    const auto reply = this->profiles();
    res.status = reply.status;
    res.set_content(jsonl::dump(reply.body), "application/json");
  });
}

InfillService::~InfillService() { stop(); }

Reply InfillService::infill(const std::string& request_body) const {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(request_body);
  } catch (const nlohmann::json::parse_error& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");

  const ModelProfile* profile = nullptr;
  assemble::CompletionRequest request;
  try {
    const auto profile_name =
        jsonl::optional_string(req, "model_profile", "request").value_or(profiles_.front().name);
    profile = &find_profile(profiles_, profile_name);
    const auto language = jsonl::optional_string(req, "language", "request").value_or("python");

    if (req.contains("source")) {
      if (!req.contains("cursor") || !req["cursor"].is_number_unsigned())
        return error_reply(400, "\"cursor\" must be a non-negative integer");
      assemble::CursorContext ctx{string_field(req, "source"), req["cursor"].get<std::size_t>(),
                                  language};
      request = assemble::parse_request(ctx, profile->markers, profile->name);
    } else {
      request.prefix = string_field(req, "prefix");
      request.suffix = string_field(req, "suffix");
      request.instruction = jsonl::optional_string(req, "instruction", "request");
      if (request.instruction && request.instruction->empty()) request.instruction.reset();
      request.language = language;
      request.model_profile = profile->name;
    }
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }

  bool wants_completion = true;
  if (req.contains("complete")) {
    if (!req["complete"].is_boolean()) return error_reply(400, "\"complete\" must be a boolean");
    wants_completion = req["complete"].get<bool>();
  }

  Reply reply;
  try {
    reply.body["input"] = assemble::assemble_input(request, *profile);
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
  reply.body["model_profile"] = profile->name;
  if (request.instruction) reply.body["instruction"] = *request.instruction;

  if (backend_ && wants_completion) {
    try {
      std::string text;
      const std::string input = reply.body["input"].get<std::string>();
      if (backend_->concurrent()) {
        text = backend_->generate(input, max_new_tokens_, true);
      } else {
        std::lock_guard lock(impl_->backend_mutex);
        text = backend_->generate(input, max_new_tokens_, true);
      }
      eval::EvalConfig cut;
      cut.sentinels = profile->sentinels;
      cut.stop = profile->stop;
      reply.body["completion"] = eval::truncate_completion(text, cut);
    } catch (const std::exception& e) {
      return error_reply(502, std::string("backend failure: ") + e.what());
    }
  }
  return reply;
}

Reply InfillService::profiles() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : profiles_) list.push_back(to_json(p));
  return {200, {{"profiles", list}}};
}

bool InfillService::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int InfillService::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool InfillService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void InfillService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool InfillService::running() const { return impl_->server.is_running(); }

}  // namespace ifim::service
