#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <system_error>

#include "acgan/core/error.hpp"

namespace acgan {

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Ordered key=value text block used for checkpoint metadata. Numbers are
/// written in round-trip form so a reload reproduces every value exactly.
class Meta {
 public:
  void set(const std::string& key, std::string value) {
    detail::require(key.find_first_of("=\n") == std::string::npos && value.find('\n') == std::string::npos,
                    "meta: key/value must not contain '=' or newlines: " + key);
    values_[key] = std::move(value);
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw FormatError("metadata is missing key '" + key + "'");
    return it->second;
  }

  std::uint64_t u64(const std::string& key) const {
    const auto& s = str(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw FormatError("metadata key '" + key + "' is not an unsigned integer: " + s);
    return v;
  }

  std::size_t size_value(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  double f64(const std::string& key) const {
    const auto& s = str(key);
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw FormatError("metadata key '" + key + "' is not a number: " + s);
    return v;
  }

  bool flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw FormatError("metadata key '" + key + "' is not a boolean: " + s);
  }

  std::string encode() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  static Meta parse(std::string_view text) {
    Meta m;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      const auto line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw FormatError("metadata line without '=': " + std::string(line));
      m.values_[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    return m;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace acgan
