#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ifim::text {

/// Splits `s` into lines. Every line keeps its trailing '\n'; a final line
/// without a newline is still returned. Concatenating the result yields `s`.
std::vector<std::string_view> split_lines(std::string_view s);

bool is_blank(std::string_view s);

std::string_view trim(std::string_view s);
std::string_view trim_left(std::string_view s);

std::string to_lower(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

/// Joins a contiguous range of lines [first, last).
std::string join(const std::vector<std::string_view>& lines, std::size_t first,
                 std::size_t last);

}  // namespace ifim::text
