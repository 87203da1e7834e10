#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mosaic/error.hpp"

namespace mosaic {

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
/// Typed getters track which keys were consumed so unknown keys can be
/// reported as usage errors.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line_no) + ": expected key=value");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      if (key.empty()) throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = trim(trimmed.substr(eq + 1));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::Io, "cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  template <typename T>
  void get(const std::string& key, T& out) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    used_.insert(key);
    out = convert<T>(key, it->second);
  }

  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    used_.insert(key);
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) out.push_back(convert<double>(key, trim(item)));
    return out;
  }

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  void require_all_used() const {
    const auto unused = unused_keys();
    if (!unused.empty()) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + unused.front() + "'");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  template <typename T>
  static T convert(const std::string& key, const std::string& text) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
      if (text == "false" || text == "0" || text == "no" || text == "off") return false;
      throw Error(ErrorCode::InvalidArgument, "key '" + key + "': expected boolean, got '" + text + "'");
    } else if constexpr (std::is_floating_point_v<T>) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return static_cast<T>(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "key '" + key + "': expected number, got '" + text + "'");
      }
    } else {
      T v{};
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::InvalidArgument, "key '" + key + "': expected integer, got '" + text + "'");
      }
      return v;
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace mosaic
