#pragma once

#include <string>
#include <vector>

namespace chkp {

/// 17 significant digits; enough to round-trip any double.
std::string format_double(double v);

/// Header row plus numeric rows, comma separated, LF line endings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
};

/// Creates parent directories as needed and writes `content` verbatim.
void write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// dir + "/" + name without doubling separators.
std::string join_path(const std::string& dir, const std::string& name);

}  // namespace chkp
