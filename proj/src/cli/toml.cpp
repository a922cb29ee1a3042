#include "ssar/cli/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "ssar/error.hpp"

namespace ssar::cli {

const char* Value::kind_name() const {
  switch (kind) {
    case Kind::Bool: return "boolean";
    case Kind::Int: return "integer";
    case Kind::Float: return "float";
    case Kind::String: return "string";
    case Kind::Array: return "array";
  }
  return "?";
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, const std::string& source, int line) : t_(text), src_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw UserError("config_parse", src_ + ":" + std::to_string(line_) + ": " + why,
                    {{"source", src_}, {"line", std::to_string(line_)}});
  }

  void skip_ws() {
    while (p_ < t_.size() && (t_[p_] == ' ' || t_[p_] == '\t')) ++p_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return p_ >= t_.size() || t_[p_] == '#';
  }
  void expect_end() {
    if (!at_end_or_comment()) fail("unexpected trailing characters");
  }

  std::string bare_key() {
    skip_ws();
    const std::size_t b = p_;
    while (p_ < t_.size() && (std::isalnum(static_cast<unsigned char>(t_[p_])) || t_[p_] == '_' || t_[p_] == '-')) ++p_;
    if (p_ == b) fail("expected a key");
    return std::string(t_.substr(b, p_ - b));
  }

  void expect(char c) {
    skip_ws();
    if (p_ >= t_.size() || t_[p_] != c) fail(std::string("expected '") + c + "'");
    ++p_;
  }

  Value value() {
    skip_ws();
    if (p_ >= t_.size()) fail("missing value");
    Value v;
    v.line = line_;
    const char c = t_[p_];
    if (c == '"') {
      v.kind = Value::Kind::String;
      v.s = string_literal();
    } else if (c == '[') {
      v.kind = Value::Kind::Array;
      ++p_;
      skip_ws();
      if (p_ < t_.size() && t_[p_] == ']') {
        ++p_;
        return v;
      }
      for (;;) {
        v.items.push_back(value());
        if (v.items.back().kind == Value::Kind::Array) fail("nested arrays are not supported");
        skip_ws();
        if (p_ < t_.size() && t_[p_] == ',') {
          ++p_;
          skip_ws();
          if (p_ < t_.size() && t_[p_] == ']') {
            ++p_;
            break;
          }
          continue;
        }
        expect(']');
        break;
      }
    } else if (t_.substr(p_, 4) == "true") {
      v.kind = Value::Kind::Bool;
      v.b = true;
      p_ += 4;
    } else if (t_.substr(p_, 5) == "false") {
      v.kind = Value::Kind::Bool;
      p_ += 5;
    } else {
      number(v);
    }
    return v;
  }

 private:
  std::string string_literal() {
    ++p_;  // opening quote
    std::string out;
    while (p_ < t_.size() && t_[p_] != '"') {
      char c = t_[p_++];
      if (c == '\\') {
        if (p_ >= t_.size()) fail("unterminated escape");
        const char e = t_[p_++];
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (p_ >= t_.size()) fail("unterminated string");
    ++p_;
    return out;
  }

  void number(Value& v) {
    const std::size_t b = p_;
    while (p_ < t_.size() && (std::isalnum(static_cast<unsigned char>(t_[p_])) || t_[p_] == '.' || t_[p_] == '+' ||
                              t_[p_] == '-' || t_[p_] == '_'))
      ++p_;
    std::string tok;
    for (char ch : t_.substr(b, p_ - b))
      if (ch != '_') tok.push_back(ch);
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "nan";
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (*first == '+') ++first;
    if (is_float) {
      v.kind = Value::Kind::Float;
      auto [ptr, ec] = std::from_chars(first, last, v.f);
      if (ec != std::errc() || ptr != last || !std::isfinite(v.f)) fail("malformed number '" + tok + "'");
    } else {
      v.kind = Value::Kind::Int;
      auto [ptr, ec] = std::from_chars(first, last, v.i);
      if (ec != std::errc() || ptr != last) fail("malformed integer '" + tok + "'");
    }
  }

  std::string_view t_;
  const std::string& src_;
  int line_;
  std::size_t p_ = 0;
};

}  // namespace

Document parse_document(std::string_view text, std::string source) {
  Document doc;
  doc.source = std::move(source);
  doc.sections.push_back({});
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    LineParser lp(line, doc.source, line_no);
    if (lp.at_end_or_comment()) continue;
    std::size_t first = line.find_first_not_of(" \t");
    if (line[first] == '[') {
      LineParser hp(line.substr(first + 1), doc.source, line_no);
      const std::string name = hp.bare_key();
      hp.expect(']');
      hp.expect_end();
      if (!seen_sections.insert(name).second) lp.fail("duplicate section [" + name + "]");
      doc.sections.push_back({name, {}, line_no});
      seen_keys.clear();
      continue;
    }
    const std::string key = lp.bare_key();
    lp.expect('=');
    Value v = lp.value();
    lp.expect_end();
    if (!seen_keys.insert(key).second) lp.fail("duplicate key '" + key + "'");
    doc.sections.back().entries.push_back({key, std::move(v)});
  }
  if (doc.sections.front().entries.empty()) doc.sections.erase(doc.sections.begin());
  return doc;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string format_float(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace ssar::cli
