#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctnli::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::vector<std::string> read_lines(const std::string& path);

// Minimal CSV handling: fields with commas, quotes or newlines are quoted,
// embedded quotes doubled.
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

// Round-trip exact decimal form for doubles (%.17g).
std::string format_double(double v);

}  // namespace ctnli::io
