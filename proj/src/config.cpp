#include "ifim/config.hpp"

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"

namespace ifim {

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  PipelineConfig c;
  try {
    if (const auto p = j.find("profiles"); p != j.end()) {
      if (p->is_string()) {
        std::filesystem::path path = p->get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        c.profiles = load_profiles(path);
      } else {
        c.profiles = profiles_from_json(*p);
      }
      c.profile = c.profiles.front().name;
    }
    c.profile = j.value("profile", c.profile);
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    if (const auto s = j.find("synth"); s != j.end()) {
      c.synth_backend = s->value("backend", c.synth_backend);
      c.synth_model = s->value("model", c.synth_model);
      c.synth_retries = s->value("retries", c.synth_retries);
      c.synth_in_flight = s->value("max_in_flight", c.synth_in_flight);
    }
    if (const auto e = j.find("eval"); e != j.end()) {
      c.eval_model = e->value("model", c.eval_model);
      c.timeout_s = e->value("timeout_s", c.timeout_s);
      c.max_new_tokens = e->value("max_new_tokens", c.max_new_tokens);
      if (e->contains("interpreter"))
        c.interpreter = (*e)["interpreter"].get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  find_profile(c.profiles, c.profile);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace ifim
