#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "ifim/profile.hpp"

namespace ifim::assemble {

struct CursorContext {
  std::string source;
  std::size_t cursor = 0;  ///< byte offset, 0..source.size()
  std::string language;
};

struct CompletionRequest {
  std::string prefix;
  std::string suffix;
  std::optional<std::string> instruction;
  std::string language;
  std::string model_profile;
  /// The instruction line as it appeared in the source and the prefix offset
  /// it was cut from. Empty when no instruction was found.
  std::string instruction_line;
  std::size_t instruction_offset = 0;

  /// Source text before the instruction line was removed.
  std::string reconstruct() const;
};

/// Splits at the cursor. When the nearest non-blank line at or above the
/// cursor is `opener + sigil ...`, its text becomes the instruction and the
/// line leaves the prefix. A shebang on the first line is never an
/// instruction.
CompletionRequest parse_request(const CursorContext& ctx, const MarkerTable& markers,
                                std::string_view model_profile = "default");

/// Default IFIM layout when an instruction is present, plain base-mode FIM
/// otherwise. Returns the full layout string.
std::string assemble_input(const CompletionRequest& req, const ModelProfile& profile);

}  // namespace ifim::assemble
