// csv.hpp: small comma-separated table reader/writer for sweep and fit files.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace btc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; std::invalid_argument if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  // Empty cell -> nullopt; std::invalid_argument on unparsable text.
  std::optional<double> number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string to_csv(const CsvTable& table);

// Fixed 12-significant-digit format used in every output table.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

}  // namespace btc
