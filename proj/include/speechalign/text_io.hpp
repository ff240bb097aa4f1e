#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace speechalign {

// printf-style fixed notation, locale independent.
std::string format_fixed(double value, int decimals);

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char delimiter);

// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_whitespace(std::string_view s);

// Full-string numeric conversions; throw std::invalid_argument on junk.
double parse_double(std::string_view s);
long long parse_integer(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace speechalign
