#include "ifim/assemble.hpp"

#include "ifim/error.hpp"
#include "ifim/text.hpp"

namespace ifim::assemble {

std::string CompletionRequest::reconstruct() const {
  std::string out = prefix.substr(0, instruction_offset);
  out += instruction_line;
  out += prefix.substr(instruction_offset);
  out += suffix;
  return out;
}

CompletionRequest parse_request(const CursorContext& ctx, const MarkerTable& markers,
                                std::string_view model_profile) {
  if (ctx.cursor > ctx.source.size())
    throw InvalidInput("cursor " + std::to_string(ctx.cursor) + " is outside the source (" +
                       std::to_string(ctx.source.size()) + " bytes)");
  const auto marker = markers.find(ctx.language);
  if (marker == markers.end())
    throw InvalidInput("no instruction marker configured for language '" + ctx.language + "'");

  CompletionRequest req;
  req.prefix = ctx.source.substr(0, ctx.cursor);
  req.suffix = ctx.source.substr(ctx.cursor);
  req.language = ctx.language;
  req.model_profile = std::string(model_profile);

  const auto lines = text::split_lines(req.prefix);
  std::size_t k = lines.size();
  while (k > 0 && text::is_blank(lines[k - 1])) --k;
  if (k == 0) return req;

  const auto line = lines[k - 1];
  const auto body = text::trim_left(line);
  const std::string tag = marker->second.opener + marker->second.sigil;
  if (!text::starts_with(body, tag)) return req;
  if (k == 1 && text::starts_with(body, "#!/")) return req;
  const auto instruction = text::trim(body.substr(tag.size()));
  if (instruction.empty()) return req;

  std::size_t offset = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) offset += lines[i].size();
  req.instruction = std::string(instruction);
  req.instruction_line = std::string(line);
  req.instruction_offset = offset;
  req.prefix.erase(offset, line.size());
  return req;
}

std::string assemble_input(const CompletionRequest& req, const ModelProfile& profile) {
  corpus::InstructionRecord record{{req.prefix, "", req.suffix, req.language, ""}, "", ""};
  if (req.instruction && !req.instruction->empty()) {
    record.instruction = *req.instruction;
    return format::render_ifim(record, profile.default_mode, profile.sentinels).layout();
  }
  return format::render_fim(record.triplet, profile.base, profile.sentinels).layout();
}

}  // namespace ifim::assemble
