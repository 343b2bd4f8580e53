#pragma once
#include <string>
#include <string_view>
#include <vector>

namespace apiforge {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Splits on '\n'; a trailing newline does not produce an empty final element.
std::vector<std::string> split_lines(std::string_view text);

std::string join_lines(const std::vector<std::string>& lines);

// Lowercased alphanumeric runs; everything else is a separator.
std::vector<std::string> tokenize_words(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace apiforge
