#pragma once

// Key-value configuration files.
//
// Grammar (one entry per line):
//
//   line    := blank | comment | entry
//   comment := '#' anything
//   entry   := key ws* '=' ws* value ws* [ '#' anything ]
//   key     := [A-Za-z0-9_.]+
//   value   := bare-token | '"' anything-but-quote '"'
//
// Keys are case-sensitive and may appear once. Quoted values may contain '#'.

#include <photon_switch/errors.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace photon_switch {

class KeyValueConfig {
public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto eol = text.find('\n', pos);
      auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
      pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
      ++line_no;
      cfg.parse_line(line, line_no);
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, std::string value) {
    if (!contains(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }

  void erase(const std::string& key) {
    if (values_.erase(key) == 0) return;
    used_.erase(key);
    order_.erase(std::find(order_.begin(), order_.end(), key));
  }

  std::optional<std::string> get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_[key] = true;
    return it->second;
  }

  std::optional<double> get_double(const std::string& key) const {
    auto raw = get_string(key);
    if (!raw) return std::nullopt;
    return to_double(key, *raw);
  }

  double require_double(const std::string& key) const {
    auto v = get_double(key);
    if (!v) throw ConfigError(fmt::format("missing required key '{}'", key));
    return *v;
  }

  double get_double_or(const std::string& key, double fallback) const {
    return get_double(key).value_or(fallback);
  }

  std::optional<long> get_int(const std::string& key) const {
    auto raw = get_string(key);
    if (!raw) return std::nullopt;
    long out = 0;
    const auto* first = raw->data();
    const auto* last = raw->data() + raw->size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
      throw ConfigError(fmt::format("key '{}': expected an integer, got '{}'", key, *raw));
    return out;
  }

  std::optional<bool> get_bool(const std::string& key) const {
    auto raw = get_string(key);
    if (!raw) return std::nullopt;
    if (*raw == "true" || *raw == "1" || *raw == "yes" || *raw == "on") return true;
    if (*raw == "false" || *raw == "0" || *raw == "no" || *raw == "off") return false;
    throw ConfigError(fmt::format("key '{}': expected a boolean, got '{}'", key, *raw));
  }

  // Keys in file order.
  const std::vector<std::string>& keys() const noexcept { return order_; }

  // Keys that were present but never read; useful to catch typos.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& k : order_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  // Canonical text form: sorted `key = value` lines. Stable input for hashing.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += fmt::format("{} = {}\n", k, v);
    return out;
  }

  static double to_double(const std::string& key, const std::string& raw) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (raw.empty() || end != raw.c_str() + raw.size() || errno == ERANGE)
      throw ConfigError(fmt::format("key '{}': expected a number, got '{}'", key, raw));
    return v;
  }

private:
  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  void parse_line(std::string_view line, std::size_t line_no) {
    line = trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const auto key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError(fmt::format("line {}: empty key", line_no));
    for (char c : key) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '_' || c == '.';
      if (!ok) throw ConfigError(fmt::format("line {}: invalid character in key '{}'", line_no, key));
    }
    auto rest = trim(line.substr(eq + 1));
    std::string value;
    if (!rest.empty() && rest.front() == '"') {
      const auto close = rest.find('"', 1);
      if (close == std::string_view::npos)
        throw ConfigError(fmt::format("line {}: unterminated quoted value", line_no));
      value = std::string(rest.substr(1, close - 1));
      auto tail = trim(rest.substr(close + 1));
      if (!tail.empty() && tail.front() != '#')
        throw ConfigError(fmt::format("line {}: trailing text after quoted value", line_no));
    } else {
      const auto hash = rest.find('#');
      value = std::string(trim(rest.substr(0, hash)));
      if (value.empty())
        throw ConfigError(fmt::format("line {}: missing value for key '{}'", line_no, key));
    }
    const std::string k(key);
    if (contains(k))
      throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, k));
    set(k, std::move(value));
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  mutable std::map<std::string, bool> used_;
};

// FNV-1a, 64 bit. Stable across platforms, used for config fingerprints.
inline std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace photon_switch
