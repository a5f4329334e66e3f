#include "ifim/profile.hpp"

#include "ifim/error.hpp"
#include "ifim/jsonl.hpp"

namespace ifim {

MarkerTable default_marker_table() {
  MarkerTable t;
  t["python"] = {"#", "!"};
  for (const char* lang : {"c", "cpp", "java", "javascript", "typescript", "go", "rust",
                           "csharp", "kotlin", "swift"})
    t[lang] = {"//", "!"};
  return t;
}

std::string ModelProfile::comment_marker(std::string_view language) const {
  const auto it = markers.find(language);
  return it == markers.end() ? "#" : it->second.opener;
}

ModelProfile default_profile() { return ModelProfile{}; }

std::vector<ModelProfile> profiles_from_json(const nlohmann::json& j) {
  const auto list = j.is_object() ? j.value("profiles", nlohmann::json::array()) : j;
  if (!list.is_array() || list.empty())
    throw InvalidInput("profile config needs a non-empty \"profiles\" array");
  std::vector<ModelProfile> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& p = list[i];
    const std::string where = "profile " + std::to_string(i);
    ModelProfile m;
    m.name = jsonl::required_string(p, "name", where);
    if (const auto s = p.find("sentinels"); s != p.end()) {
      m.sentinels.pre = jsonl::optional_string(*s, "pre", where).value_or(m.sentinels.pre);
      m.sentinels.suf = jsonl::optional_string(*s, "suf", where).value_or(m.sentinels.suf);
      m.sentinels.mid = jsonl::optional_string(*s, "mid", where).value_or(m.sentinels.mid);
      m.sentinels.ins = jsonl::optional_string(*s, "ins", where).value_or(m.sentinels.ins);
    }
    m.sentinels.model_profile = m.name;
    m.sentinels.validate();
    if (auto b = jsonl::optional_string(p, "base_mode", where)) m.base = format::parse_base_mode(*b);
    m.default_mode = format::default_ifim_mode(m.base);
    if (auto d = jsonl::optional_string(p, "default_mode", where)) {
      m.default_mode = format::parse_ifim_mode(*d);
      if (m.default_mode.base != m.base)
        throw InvalidInput(where + ": default_mode " + *d + " does not extend base mode");
    }
    if (const auto mk = p.find("markers"); mk != p.end()) {
      for (const auto& [lang, pair] : mk->items()) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
          throw InvalidInput(where + ": marker for '" + lang + "' must be [opener, sigil]");
        m.markers[lang] = {pair[0].get<std::string>(), pair[1].get<std::string>()};
      }
    }
    if (const auto st = p.find("stop"); st != p.end())
      m.stop = st->get<std::vector<std::string>>();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ModelProfile> load_profiles(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return profiles_from_json(j);
}

nlohmann::json to_json(const ModelProfile& profile) {
  nlohmann::json j;
  j["name"] = profile.name;
  j["sentinels"] = {{"pre", profile.sentinels.pre},
                    {"suf", profile.sentinels.suf},
                    {"mid", profile.sentinels.mid},
                    {"ins", profile.sentinels.ins}};
  j["base_mode"] = std::string(format::to_string(profile.base));
  j["default_mode"] = profile.default_mode.name();
  nlohmann::json markers = nlohmann::json::object();
  for (const auto& [lang, m] : profile.markers) markers[lang] = {m.opener, m.sigil};
  j["markers"] = markers;
  j["stop"] = profile.stop;
  return j;
}

const ModelProfile& find_profile(const std::vector<ModelProfile>& profiles,
                                 std::string_view name) {
  for (const auto& p : profiles)
    if (p.name == name) return p;
  throw InvalidInput("unknown model profile '" + std::string(name) + "'");
}

}  // namespace ifim
