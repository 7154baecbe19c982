#include "sdyn/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sdyn/errors.hpp"

namespace sdyn {

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, std::string where) : s_(text), where_(std::move(where)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string key() {
    skip_ws();
    std::string out;
    while (true) {
      skip_ws();
      std::string part;
      if (pos_ < s_.size() && s_[pos_] == '"') {
        part = quoted();
      } else {
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                    s_[pos_] == '-'))
          part += s_[pos_++];
      }
      if (part.empty()) fail("empty key");
      out += part;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '.') {
        out += '.';
        ++pos_;
        continue;
      }
      return out;
    }
  }

  ConfigValue value() {
    const char c = peek();
    if (c == '"') return quoted();
    if (c == '[') return array();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

 private:
  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char ch = s_[pos_++];
      if (ch == '\\' && pos_ < s_.size()) {
        const char e = s_[pos_++];
        switch (e) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out += ch;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  double number() {
    skip_ws();
    std::string tok;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_'))
      if (s_[pos_] == '_')
        ++pos_;
      else
        tok += s_[pos_++];
    if (tok.empty()) fail("expected a value");
    double v = 0.0;
    const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("malformed number '" + tok + "'");
    return v;
  }

  ConfigValue array() {
    ++pos_;
    std::vector<double> nums;
    std::vector<std::string> strs;
    while (true) {
      if (peek() == ']') {
        ++pos_;
        break;
      }
      if (peek() == '"') {
        if (!nums.empty()) fail("mixed array");
        strs.push_back(quoted());
      } else {
        if (!strs.empty()) fail("mixed array");
        nums.push_back(number());
      }
      const char c = peek();
      if (c == ',') {
        ++pos_;
      } else if (c != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    if (!strs.empty()) return strs;
    return nums;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string where_;
};

const char* type_name(const ConfigValue& v) {
  switch (v.index()) {
    case 0: return "boolean";
    case 1: return "number";
    case 2: return "string";
    case 3: return "number array";
    default: return "string array";
  }
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::string table;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    begin = end + 1;

    LineParser p(line, source + ":" + std::to_string(line_no));
    if (p.at_end()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      table = p.key();
      p.expect(']');
      if (!p.at_end()) p.fail("trailing characters after table header");
      continue;
    }
    const std::string key = (table.empty() ? "" : table + ".") + p.key();
    p.expect('=');
    ConfigValue v = p.value();
    if (!p.at_end()) p.fail("trailing characters after value");
    if (cfg.values_.count(key)) p.fail("duplicate key '" + key + "'");
    cfg.values_.emplace(key, std::move(v));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

const ConfigValue* Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

namespace {

template <class T>
const T& typed(const ConfigValue& v, const std::string& key, const char* want) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw ConfigError("config key '" + key + "' should be a " + want + ", got a " + type_name(v));
}

}  // namespace

double Config::number(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  return v ? typed<double>(*v, key, "number") : fallback;
}

std::size_t Config::count(const std::string& key, std::size_t fallback) const {
  const ConfigValue* v = find(key);
  if (!v) return fallback;
  const double d = typed<double>(*v, key, "number");
  if (!(d >= 0.0) || d != std::floor(d) || d > 9007199254740992.0)
    throw ConfigError("config key '" + key + "' should be a non-negative integer");
  return static_cast<std::size_t>(d);
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t fallback) const {
  return find(key) ? static_cast<std::uint64_t>(count(key, 0)) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const ConfigValue* v = find(key);
  return v ? typed<bool>(*v, key, "boolean") : fallback;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const ConfigValue* v = find(key);
  return v ? typed<std::string>(*v, key, "string") : fallback;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const ConfigValue* v = find(key);
  if (!v) return fallback;
  if (const double* d = std::get_if<double>(v)) return {*d};
  return typed<std::vector<double>>(*v, key, "number array");
}

std::vector<std::string> Config::strings(const std::string& key, const std::vector<std::string>& fallback) const {
  const ConfigValue* v = find(key);
  if (!v) return fallback;
  if (const std::string* s = std::get_if<std::string>(v)) return {*s};
  // An empty array parses as numeric.
  if (const auto* d = std::get_if<std::vector<double>>(v); d && d->empty()) return {};
  return typed<std::vector<std::string>>(*v, key, "string array");
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, v] : values_) {
    bool ok = false;
    for (const auto& k : known) {
      if (k == key || (k.size() > 2 && k.ends_with(".*") && key.starts_with(k.substr(0, k.size() - 1)))) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(source_ + ": unknown config key '" + key + "'");
  }
}

}  // namespace sdyn
