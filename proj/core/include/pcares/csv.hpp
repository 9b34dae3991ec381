#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcares {

/// Named numeric columns of equal length.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<double>* find(std::string_view name) const;
};

/// Parses comma-separated text with a header row. Every field must be a
/// decimal number; throws ParseError naming the data row (1-based, header
/// excluded) and the column.
Table parse_csv(std::string_view text, std::string_view source = "<memory>",
                std::size_t min_rows = 2);

Table load_csv(const std::filesystem::path& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace pcares
