#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sdyn {

using ConfigValue = std::variant<bool, double, std::string, std::vector<double>, std::vector<std::string>>;

// Flat view of a TOML-style file. Supported: [table] headers, dotted keys,
// strings, numbers, booleans, arrays of numbers or strings, # comments.
// Keys are stored fully qualified ("model.gamma").
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys() const;
  void set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }

  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& fallback) const;

  // Throws ConfigError naming the first key not covered by `known`. A known
  // entry ending in ".*" admits any key under that prefix.
  void require_known(const std::vector<std::string>& known) const;

 private:
  const ConfigValue* find(const std::string& key) const;
  std::map<std::string, ConfigValue> values_;
  std::string source_;
};

}  // namespace sdyn
