#pragma once

// Reader for the small TOML-shaped config grammar documented in README:
// [section] headers, key = value lines, # comments. Values are booleans,
// integers, floats, double-quoted strings, and single-line arrays of those.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ssar::cli {

struct Value {
  enum class Kind { Bool, Int, Float, String, Array };
  Kind kind = Kind::Int;
  bool b = false;
  std::int64_t i = 0;
  double f = 0.0;
  std::string s;
  std::vector<Value> items;
  int line = 0;

  const char* kind_name() const;
};

struct Entry {
  std::string key;
  Value value;
};

struct Section {
  std::string name;  // empty for keys before the first header
  std::vector<Entry> entries;
  int line = 0;
};

struct Document {
  std::string source;
  std::vector<Section> sections;
};

/// Throws UserError("config_parse") with the line number on malformed
/// input, duplicate sections, or duplicate keys.
Document parse_document(std::string_view text, std::string source = "<config>");

/// Quoted and escaped string literal.
std::string quote(std::string_view s);
/// Shortest decimal form that parses back to the same double, always with
/// a '.' or exponent so it reads back as a float.
std::string format_float(double v);

}  // namespace ssar::cli
