#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench::text {

bool is_valid_utf8(std::string_view s);

/// Number of Unicode code points; assumes valid UTF-8.
std::size_t utf8_length(std::string_view s);

/// Byte offset of every code point start, plus a final entry equal to s.size().
std::vector<std::size_t> utf8_boundaries(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::string collapse_whitespace(std::string_view s);

/// Lowercased word set: maximal runs of ASCII alphanumerics or non-ASCII bytes.
std::set<std::string> word_set(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace ragbench::text
