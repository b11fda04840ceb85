#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fxlearn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `section.key = value` config. '#' starts a comment, blank lines are
// ignored, later assignments win. Typed getters raise ConfigError naming the
// key on missing/malformed values.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key) const;
  double get_num(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Comma-separated list value.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_num_list(const std::string& key) const;

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  const std::map<std::string, std::string>& all() const { return values_; }

  // Serialized back to `key = value` lines (sorted), for config snapshots.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fxlearn
