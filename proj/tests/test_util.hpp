#pragma once

#include <cstdint>
#include <random>
#include <string>

// Random text generators shared by the property tests. They are independent
// of the library's own seeded RNG.
namespace ifim::testing {

inline std::string random_text(std::mt19937_64& g, std::size_t max_len,
                               std::string_view alphabet = "abcxyz _=()+:.,#'\"\t\n") {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const auto n = len(g);
  for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(g)]);
  return s;
}

/// Source file of 1..max_lines lines, optionally without a final newline.
inline std::string random_source(std::mt19937_64& g, std::size_t max_lines) {
  std::uniform_int_distribution<std::size_t> lines(1, max_lines);
  std::bernoulli_distribution final_newline(0.7), blank(0.15), crlf(0.1);
  const auto n = lines(g);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (!blank(g)) s += "x" + random_text(g, 30, "abcdefgh ()=+-*:#\t");
    if (i + 1 < n || final_newline(g)) s += crlf(g) ? "\r\n" : "\n";
  }
  if (s.empty() || s.find_first_not_of(" \t\r\n") == std::string::npos) s = "pass\n";
  return s;
}

}  // namespace ifim::testing
