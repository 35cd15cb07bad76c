#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace reflect {

/// Flat key/value configuration parsed from a TOML-style file:
/// `[section]` headers, `key = value` lines, `#` comments. Values are
/// strings, numbers, or booleans; keys are addressed as "section.key".
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace reflect
