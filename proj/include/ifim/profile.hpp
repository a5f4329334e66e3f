#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ifim/format.hpp"

namespace ifim {

/// How a language writes an instruction comment: opener immediately followed
/// by the sigil, e.g. "#" + "!" for Python.
struct InstructionMarker {
  std::string opener;
  std::string sigil;
};

using MarkerTable = std::map<std::string, InstructionMarker, std::less<>>;

/// Python uses "#!"; the C-family "//!" entries are an extrapolation.
MarkerTable default_marker_table();

/// Everything the toolchain needs to know about one target model.
struct ModelProfile {
  std::string name = "default";
  format::SentinelSet sentinels;
  format::BaseMode base = format::BaseMode::PSM;
  format::IfimMode default_mode = format::default_ifim_mode(format::BaseMode::PSM);
  MarkerTable markers = default_marker_table();
  /// End-of-text markers that terminate a generated middle, besides sentinels.
  std::vector<std::string> stop = {"<EOT>", "<|endoftext|>"};

  /// Line-comment opener for a language, "#" when unknown.
  std::string comment_marker(std::string_view language) const;
};

ModelProfile default_profile();

/// {"profiles": [{"name", "sentinels": {"pre","suf","mid","ins"}, "base_mode",
///   "default_mode"?, "markers"?: {lang: [opener, sigil]}, "stop"?: [..]}]}
std::vector<ModelProfile> profiles_from_json(const nlohmann::json& j);
std::vector<ModelProfile> load_profiles(const std::filesystem::path& path);

nlohmann::json to_json(const ModelProfile& profile);

const ModelProfile& find_profile(const std::vector<ModelProfile>& profiles,
                                 std::string_view name);

}  // namespace ifim
