#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ifim/corpus.hpp"

namespace ifim::format {

enum class BaseMode { PSM, PMS, SPM };

enum class Component : char { P = 'P', S = 'S', M = 'M', I = 'I' };

/// A base mode with the instruction inserted before slot `ins_position`
/// (0..3; 3 appends it after the last base component).
struct IfimMode {
  BaseMode base = BaseMode::PSM;
  int ins_position = 2;

  std::string name() const;
  bool operator==(const IfimMode&) const = default;
};

using Mode = std::variant<BaseMode, IfimMode>;

std::string_view to_string(BaseMode mode);
std::string mode_name(const Mode& mode);
BaseMode base_of(const Mode& mode);
std::vector<Component> components(const Mode& mode);

/// Parses "PSM"-style or "PSIM"-style names; anything else throws.
Mode parse_mode(std::string_view name);
BaseMode parse_base_mode(std::string_view name);
IfimMode parse_ifim_mode(std::string_view name);

/// Literal sentinel strings of one model.
struct SentinelSet {
  std::string pre = "<PRE>";
  std::string suf = "<SUF>";
  std::string mid = "<MID>";
  std::string ins = "<INS>";
  std::string model_profile = "default";

  /// Non-empty, pairwise distinct, none a substring of another.
  void validate() const;
};

/// A rendered sequence. The model generates the target right after `input`;
/// `input_after` holds conditioning text the layout places after the middle
/// slot (only non-empty for PMS-family layouts and trailing instructions).
struct Rendered {
  std::string input;
  std::string input_after;
  std::string target;

  std::string layout() const { return input + input_after; }
};

std::vector<IfimMode> enumerate_ifim_modes(BaseMode base);

/// The instruction goes immediately before the middle.
IfimMode default_ifim_mode(BaseMode base);

Rendered render_fim(const corpus::FimTriplet& triplet, BaseMode mode,
                    const SentinelSet& sentinels);

/// Throws on an empty instruction; plain rendering is render_fim's job.
Rendered render_ifim(const corpus::InstructionRecord& record, const IfimMode& mode,
                     const SentinelSet& sentinels);

struct LayoutParts {
  std::string prefix;
  std::string suffix;
  std::optional<std::string> instruction;
};

/// Inverse of rendering: splits a layout string back into its components.
/// Throws when the text does not follow the mode's layout or when the mode
/// puts two free-text components side by side (PMIS), which is ambiguous.
LayoutParts parse_layout(std::string_view layout, const Mode& mode,
                         const SentinelSet& sentinels);

struct VocabEntry {
  std::string token;
  std::uint64_t frequency = 0;
};

/// Lowest-frequency token (ties: lowest index) that does not equal, contain
/// or sit inside any of the pre/suf/mid sentinels.
std::string select_ins_token(const std::vector<VocabEntry>& vocab,
                             const SentinelSet& reserved = {});

/// Context components (P, S) laid out strictly before the instruction, in
/// layout order. Their KV-cache survives an edit of the instruction text.
std::vector<Component> cache_survival(const IfimMode& mode);

struct TrainingExample {
  std::string record_id;
  std::string mode;
  corpus::Tag tag = corpus::Tag::plain_fim;
  std::string input;
  std::string input_after;
  std::string target;
};

/// ifim renders with the instruction (a base mode means its default IFIM
/// mode); plain_fim drops the instruction. cfim must go through the triplet
/// overload with a to_cfim triplet.
TrainingExample build_training_example(const corpus::InstructionRecord& record,
                                       const Mode& mode, const SentinelSet& sentinels,
                                       corpus::Tag tag);
TrainingExample build_training_example(const corpus::FimTriplet& triplet, const Mode& mode,
                                       const SentinelSet& sentinels, corpus::Tag tag);

nlohmann::json to_json(const TrainingExample& example);

}  // namespace ifim::format
