#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace trend::config {

// Flat key-value configuration with INI-style sections. A line "[training]"
// opens a section; "lr = 0.01" below it defines key "training.lr". Comment
// lines start with '#' or ';'. The last assignment to a key wins.
//
// Lookups resolve in precedence order: explicit overrides (CLI flags), then
// process environment, then the parsed file. The environment spelling of a
// key is env_name(key), e.g. "training.lr" -> "TREND_TRAINING_LR".
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text);
  static Config load_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws InputError when absent
  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  int64_t get_int64(const std::string& key, int64_t fallback) const;
  uint64_t get_uint64(const std::string& key, uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // CLI flag values; they outrank both the file and the environment.
  void set(const std::string& key, const std::string& value);

  // File and override entries merged in precedence order, for snapshots.
  // Environment values are folded in only for keys the config already names.
  std::map<std::string, std::string> snapshot() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> overrides_;

  // Resolved value respecting precedence; nullptr-like empty optional is
  // represented by the bool flag.
  bool resolve(const std::string& key, std::string* out) const;
};

// Environment variable spelling for a config key: "TREND_" + key upper-cased
// with every non-alphanumeric character replaced by '_'.
std::string env_name(const std::string& key);

}  // namespace trend::config
