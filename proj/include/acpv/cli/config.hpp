#pragma once

// key = value run configuration shared by the subcommands. Command-line
// flags override the file; the file overrides built-in defaults.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "acpv/error.hpp"

namespace acpv::cli {

/// Bad flags or arguments; reported with exit code 2.
class UsageError : public Error {
  using Error::Error;
};

inline std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), sp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), sp).base(), s.end());
  return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw UsageError(key + ": expected a number, got '" + s + "'");
  return v;
}

inline long parse_int(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw UsageError(key + ": expected an integer, got '" + s + "'");
  return v;
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
  std::vector<double> v;
  for (const auto& item : split_list(s)) v.push_back(parse_double(item, key));
  return v;
}

class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse(const std::string& text, const std::string& origin = "config") {
    ConfigFile c;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') continue;  // section headers are ignored
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      std::replace(key.begin(), key.end(), '-', '_');
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
      value.erase(std::remove(value.begin(), value.end(), '"'), value.end());
      c.values_[key] = value;
    }
    return c;
  }

  static ConfigFile load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path.string());
  }

  /// Loads --config if given, else $ACPV_CONFIG if set, else nothing.
  static ConfigFile resolve(const std::string& flag) {
    if (!flag.empty()) return load(flag);
    if (const char* env = std::getenv("ACPV_CONFIG"); env && *env) return load(env);
    return {};
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const { return values_.at(key); }

 private:
  std::map<std::string, std::string> values_;
};

struct ClassScheme {
  std::vector<std::string> names{"building", "road", "vegetation", "water", "unvegetated"};
  std::vector<std::string> palette{"#d62728", "#7f7f7f", "#2ca02c", "#1f77b4", "#e3c16f"};
  std::vector<std::string> elongated{"road", "water"};

  /// Elongated classes as indices; entries may be names or integers.
  std::vector<int> elongated_ids(int num_classes) const {
    std::vector<int> ids;
    for (const auto& e : elongated) {
      int id = -1;
      const auto it = std::find(names.begin(), names.end(), e);
      if (it != names.end()) id = int(it - names.begin());
      else id = int(parse_int(e, "elongated"));
      if (id < 0 || id >= num_classes) throw UsageError("elongated: class '" + e + "' out of range");
      ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }
};

}  // namespace acpv::cli
