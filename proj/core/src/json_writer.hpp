#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pcares::detail {

// Streaming pretty-printed JSON with 17-significant-digit floats and a fixed
// key order, so identical inputs give byte-identical output.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& value(double v);
  JsonWriter& value(long long v);
  JsonWriter& value(unsigned long long v);
  JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
  JsonWriter& value(long v) { return value(static_cast<long long>(v)); }
  JsonWriter& value(unsigned long v) { return value(static_cast<unsigned long long>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

  /// Arrays of numbers are written on one line.
  JsonWriter& number_array(const std::vector<double>& values);

  const std::string& str() const { return out_; }

 private:
  struct Level {
    bool array;
    bool empty = true;
  };
  void before_value();
  void newline();
  void raw(std::string_view s) { out_ += s; }

  std::string out_;
  std::vector<Level> stack_;
  bool after_key_ = false;
};

std::string json_escape(std::string_view s);

}  // namespace pcares::detail
