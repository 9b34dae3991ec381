#include "pcares/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcares/error.hpp"

namespace pcares {

const std::vector<double>* Table::find(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return &columns[j];
  }
  return nullptr;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool parse_number(std::string_view field, double& value) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

Table parse_csv(std::string_view text, std::string_view source, std::size_t min_rows) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  Table table;
  std::size_t line_no = 0;
  std::size_t data_row = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (nl == text.size()) break;
      continue;
    }
    auto fields = split_fields(line);
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) fail(ErrorCode::ParseError, where + ": empty column name in header");
        for (const auto& existing : table.names) {
          if (existing == f) fail(ErrorCode::ParseError, where + ": duplicate column '" + std::string(f) + "'");
        }
        table.names.emplace_back(f);
      }
      table.columns.resize(table.names.size());
      have_header = true;
      continue;
    }
    ++data_row;
    if (fields.size() != table.names.size()) {
      fail(ErrorCode::ParseError, where + ": row " + std::to_string(data_row) + " has " +
                                      std::to_string(fields.size()) + " fields, header has " +
                                      std::to_string(table.names.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v)) {
        fail(ErrorCode::ParseError, where + ": row " + std::to_string(data_row) + ", column '" +
                                        table.names[j] + "': cannot parse '" + std::string(fields[j]) +
                                        "' as a number");
      }
      table.columns[j].push_back(v);
    }
    if (nl == text.size()) break;
  }
  if (!have_header) fail(ErrorCode::ParseError, std::string(source) + ": missing header row");
  if (table.rows() < min_rows) {
    fail(ErrorCode::ParseError,
         std::string(source) + ": need at least " + std::to_string(min_rows) + " data rows");
  }
  return table;
}

Table load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

std::string format_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace pcares
