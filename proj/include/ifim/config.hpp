#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifim/profile.hpp"

namespace ifim {

/// Settings shared by every CLI subcommand. Loaded from a JSON file and then
/// overridden by flags. Seeds are always explicit.
struct PipelineConfig {
  std::vector<ModelProfile> profiles = {default_profile()};
  std::string profile = "default";
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  ///< 0 = hardware concurrency

  std::string synth_backend = "mock";  ///< mock | http
  std::string synth_model = "gpt-4.1";
  int synth_retries = 2;
  std::size_t synth_in_flight = 8;

  std::string eval_model = "model";
  double timeout_s = 10.0;
  int max_new_tokens = 128;
  std::vector<std::string> interpreter = {"python3"};

  const ModelProfile& active_profile() const { return find_profile(profiles, profile); }
};

/// Keys: "profiles" (inline array or path to a profile file), "profile",
/// "seed", "jobs", "synth": {"backend","model","retries","max_in_flight"},
/// "eval": {"model","timeout_s","max_new_tokens","interpreter"}.
PipelineConfig config_from_json(const nlohmann::json& j,
                                const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace ifim
