#include "trend/config.hpp"

#include <cstdlib>

#include "trend/common.hpp"

namespace trend::config {

std::string env_name(const std::string& key) {
  std::string out = "TREND_";
  for (char c : key) {
    if (c >= 'a' && c <= 'z')
      out.push_back(static_cast<char>(c - 'a' + 'A'));
    else if ((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))
      out.push_back(c);
    else
      out.push_back('_');
  }
  return out;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::string section;
  int line_no = 0;
  for (const std::string& raw : split_lines(text)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw InputError("config line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw InputError("config line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw InputError("config line " + std::to_string(line_no) + ": empty key");
    std::string value = trim(line.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;
    cfg.values_[full] = value;
  }
  return cfg;
}

Config Config::load_file(const std::string& path) { return parse(read_file(path)); }

bool Config::resolve(const std::string& key, std::string* out) const {
  auto ov = overrides_.find(key);
  if (ov != overrides_.end()) {
    *out = ov->second;
    return true;
  }
  if (const char* env = std::getenv(env_name(key).c_str())) {
    *out = env;
    return true;
  }
  auto it = values_.find(key);
  if (it != values_.end()) {
    *out = it->second;
    return true;
  }
  return false;
}

bool Config::has(const std::string& key) const {
  std::string ignored;
  return resolve(key, &ignored);
}

std::string Config::get(const std::string& key) const {
  std::string out;
  if (!resolve(key, &out)) throw InputError("missing config key: " + key);
  return out;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  std::string out;
  return resolve(key, &out) ? out : fallback;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* kind) {
  throw InputError("config key " + key + ": \"" + value + "\" is not " + kind);
}

}  // namespace

int64_t Config::get_int64(const std::string& key, int64_t fallback) const {
  std::string out;
  if (!resolve(key, &out)) return fallback;
  try {
    size_t used = 0;
    int64_t v = std::stoll(out, &used);
    if (used != out.size()) bad_value(key, out, "an integer");
    return v;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, out, "an integer");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  int64_t v = get_int64(key, fallback);
  if (v < INT32_MIN || v > INT32_MAX)
    throw InputError("config key " + key + ": value out of range");
  return static_cast<int>(v);
}

uint64_t Config::get_uint64(const std::string& key, uint64_t fallback) const {
  std::string out;
  if (!resolve(key, &out)) return fallback;
  try {
    size_t used = 0;
    if (!out.empty() && out[0] == '-') bad_value(key, out, "a non-negative integer");
    uint64_t v = std::stoull(out, &used);
    if (used != out.size()) bad_value(key, out, "a non-negative integer");
    return v;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, out, "a non-negative integer");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  std::string out;
  if (!resolve(key, &out)) return fallback;
  try {
    size_t used = 0;
    double v = std::stod(out, &used);
    if (used != out.size()) bad_value(key, out, "a number");
    return v;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, out, "a number");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  std::string out;
  if (!resolve(key, &out)) return fallback;
  std::string v = lower_ascii(out);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, out, "a boolean");
}

void Config::set(const std::string& key, const std::string& value) { overrides_[key] = value; }

std::map<std::string, std::string> Config::snapshot() const {
  std::map<std::string, std::string> out = values_;
  for (const auto& [key, unused] : values_) {
    if (const char* env = std::getenv(env_name(key).c_str())) out[key] = env;
  }
  for (const auto& [key, value] : overrides_) out[key] = value;
  return out;
}

}  // namespace trend::config
