#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ifim::jsonl {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string required_string(const nlohmann::json& j, const char* key,
                            const std::string& where);
std::optional<std::string> optional_string(const nlohmann::json& j, const char* key,
                                           const std::string& where);

/// Compact single-line dump; invalid UTF-8 is replaced rather than thrown.
std::string dump(const nlohmann::json& j);

/// Parses every non-blank line, calling `fn(object, "line N")`.
void for_each_record(std::string_view content,
                     const std::function<void(const nlohmann::json&, const std::string&)>& fn);

std::string to_lines(const std::vector<nlohmann::json>& rows);

}  // namespace ifim::jsonl
