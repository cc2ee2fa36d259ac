#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace statopt {

// Minimal comma-separated reader: no quoting, header row mandatory.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::string_view text, const std::string& origin = "<memory>");
std::vector<std::string> split_csv_line(std::string_view line);

// Accepts "nan", "inf", "-inf" in addition to ordinary decimals.
double parse_double(std::string_view s, const std::string& origin = "<csv>");

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace statopt
