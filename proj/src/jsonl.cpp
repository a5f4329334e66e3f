#include "ifim/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "ifim/error.hpp"
#include "ifim/text.hpp"

namespace ifim::jsonl {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::string required_string(const nlohmann::json& j, const char* key,
                            const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": record is not a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(where + ": missing \"" + key + "\"");
  if (!it->is_string()) throw InvalidInput(where + ": \"" + key + "\" is not a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key,
                                           const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": record is not a JSON object");
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InvalidInput(where + ": \"" + key + "\" is not a string");
  return it->get<std::string>();
}

std::string dump(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void for_each_record(std::string_view content,
                     const std::function<void(const nlohmann::json&, const std::string&)>& fn) {
  std::size_t line_no = 0;
  for (auto line : text::split_lines(content)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput(where + ": malformed JSON: " + e.what());
    }
    fn(j, where);
  }
}

std::string to_lines(const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += dump(r);
    out.push_back('\n');
  }
  return out;
}

}  // namespace ifim::jsonl
