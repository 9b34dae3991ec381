#include "json_writer.hpp"

#include <cmath>
#include <cstdio>

#include "pcares/csv.hpp"

namespace pcares::detail {

std::string json_escape(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

void JsonWriter::newline() {
  out_ += '\n';
  out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::before_value() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (stack_.empty()) return;
  if (!stack_.back().empty) out_ += ',';
  stack_.back().empty = false;
  newline();
}

JsonWriter& JsonWriter::begin_object() {
  before_value();
  raw("{");
  stack_.push_back({false});
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  const bool empty = stack_.back().empty;
  stack_.pop_back();
  if (!empty) newline();
  raw("}");
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  before_value();
  raw("[");
  stack_.push_back({true});
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  const bool empty = stack_.back().empty;
  stack_.pop_back();
  if (!empty) newline();
  raw("]");
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
  before_value();
  raw(json_escape(k));
  raw(": ");
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  before_value();
  raw(std::isfinite(v) ? format_double(v) : "null");
  return *this;
}

JsonWriter& JsonWriter::value(long long v) {
  before_value();
  raw(std::to_string(v));
  return *this;
}

JsonWriter& JsonWriter::value(unsigned long long v) {
  before_value();
  raw(std::to_string(v));
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  before_value();
  raw(v ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  before_value();
  raw(json_escape(v));
  return *this;
}

JsonWriter& JsonWriter::null() {
  before_value();
  raw("null");
  return *this;
}

JsonWriter& JsonWriter::number_array(const std::vector<double>& values) {
  before_value();
  raw("[");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) raw(", ");
    raw(std::isfinite(values[i]) ? format_double(values[i]) : "null");
  }
  raw("]");
  return *this;
}

}  // namespace pcares::detail
