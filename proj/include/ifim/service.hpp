#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifim/assemble.hpp"
#include "ifim/eval.hpp"
#include "ifim/profile.hpp"

namespace ifim::service {

struct Reply {
  int status = 200;
  nlohmann::json body;
};

/// Stateless request handling for the infill service. Profiles are fixed at
/// construction; the optional backend must be safe to call concurrently
/// (calls are serialized otherwise).
class InfillService {
 public:
  InfillService(std::vector<ModelProfile> profiles,
                std::shared_ptr<eval::CompletionBackend> backend = nullptr,
                int max_new_tokens = 128);
  ~InfillService();
  InfillService(const InfillService&) = delete;
  InfillService& operator=(const InfillService&) = delete;

  /// POST /v1/infill. Body is either {source, cursor, language?, model_profile?}
  /// or {prefix, suffix, instruction?, language?, model_profile?}; "complete":
  /// false skips generation.
  Reply infill(const std::string& request_body) const;

  /// GET /v1/profiles.
  Reply profiles() const;

  /// Binds and serves until stop(). Returns false when binding fails.
  bool listen(const std::string& host, int port);
  /// Binds to a free port, returning it (or -1), then serve with
  /// listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::vector<ModelProfile> profiles_;
  std::shared_ptr<eval::CompletionBackend> backend_;
  int max_new_tokens_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ifim::service
