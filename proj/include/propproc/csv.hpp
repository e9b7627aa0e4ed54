#pragma once

#include <string>
#include <vector>

namespace propproc::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file with a header line. Supports double-quoted
// fields (quotes escaped by doubling). Throws DataError on IO failure or a
// structurally broken row.
Table read(const std::string& path);

void write(const std::string& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

// Shortest representation that round-trips exactly through parse_double.
std::string format_double(double x);

// Strict decimal parse; `context` names the file/row for the error message.
double parse_double(const std::string& field, const std::string& context);

}  // namespace propproc::csv
