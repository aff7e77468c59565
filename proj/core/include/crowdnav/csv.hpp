#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace crowdnav::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
  /// Numeric cell; empty cells read as +inf so unbounded safety round-trips.
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

/// Comma-separated, no quoting. Throws Error when the file cannot be read and
/// ParseError on ragged rows.
Table read(const std::filesystem::path& path);

/// Fixed 6-digit decimal; +inf and NaN become an empty field.
std::string fixed6(double value);

}  // namespace crowdnav::csv
