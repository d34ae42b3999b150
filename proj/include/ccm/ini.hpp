#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/csv.hpp"

namespace ccm {

// Small INI reader for the config files ([dataset], [features], ...).
// Key order within a section is preserved (feature order matters) and
// repeated keys are kept (filter lists).
class IniFile {
public:
  using Entries = std::vector<std::pair<std::string, std::string>>;

  static IniFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config file: " + path);
    IniFile ini;
    ini.path_ = path;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          fail(ErrorKind::Config, path + ":" + std::to_string(lineno) +
                                      ": malformed section header");
        section = trim(t.substr(1, t.size() - 2));
        ini.sections_[section];  // materialize even if empty
        continue;
      }
      auto eq = t.find('=');
      if (eq == std::string::npos)
        fail(ErrorKind::Config, path + ":" + std::to_string(lineno) +
                                    ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      std::string value = trim(t.substr(eq + 1));
      ini.sections_[section].emplace_back(key, value);
    }
    return ini;
  }

  bool has_section(const std::string& name) const {
    return sections_.count(name) > 0;
  }

  const Entries& section(const std::string& name) const {
    static const Entries empty;
    auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
  }

  std::optional<std::string> get(const std::string& section_name,
                                 const std::string& key) const {
    for (const auto& [k, v] : section(section_name))
      if (k == key) return v;
    return std::nullopt;
  }

  std::string get_required(const std::string& section_name,
                           const std::string& key) const {
    auto v = get(section_name, key);
    if (!v)
      fail(ErrorKind::Config, path_ + ": missing key '" + key +
                                  "' in section [" + section_name + "]");
    return *v;
  }

  std::string get_or(const std::string& section_name, const std::string& key,
                     const std::string& fallback) const {
    auto v = get(section_name, key);
    return v ? *v : fallback;
  }

  double get_double(const std::string& section_name, const std::string& key,
                    double fallback) const {
    auto v = get(section_name, key);
    return v ? parse_double(*v, path_ + " [" + section_name + "] " + key)
             : fallback;
  }

  long get_int(const std::string& section_name, const std::string& key,
               long fallback) const {
    auto v = get(section_name, key);
    if (!v) return fallback;
    return static_cast<long>(
        parse_double(*v, path_ + " [" + section_name + "] " + key));
  }

  std::vector<std::string> values(const std::string& section_name,
                                  const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : section(section_name))
      if (k == key) out.push_back(v);
    return out;
  }

  const std::string& path() const { return path_; }

  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

private:
  std::string path_;
  std::map<std::string, Entries> sections_;
};

inline std::vector<std::string> split_list(const std::string& s,
                                           char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      std::string t = IniFile::trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  std::string t = IniFile::trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

}  // namespace ccm
