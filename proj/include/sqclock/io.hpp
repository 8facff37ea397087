#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqclock/units.hpp"

namespace sqclock {

/// Flat key-value configuration. Keys are dot-qualified per subcommand
/// (e.g. "stability.gamma"); '#' starts a comment.
using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace detail

inline ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++lineno;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    out[key] = value;
  }
  return out;
}

/// Canonical text form: sorted keys, single spaces, LF endings. Parsing the
/// canonical form reproduces the same map (fixed point).
inline std::string canonical_config(const ConfigMap& config) {
  std::string out;
  for (const auto& [k, v] : config) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

/// FNV-1a 64-bit digest as fixed-width hex; stable across platforms.
inline std::string config_hash(const std::string& canonical_text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

/// Numeric parse accepting an optional "dB" suffix, converted to linear.
inline double parse_quantity(std::string_view raw) {
  std::string_view s = detail::trim(raw);
  bool db = false;
  if (s.size() > 2) {
    const std::string_view tail = s.substr(s.size() - 2);
    if (tail == "dB" || tail == "db") {
      db = true;
      s = detail::trim(s.substr(0, s.size() - 2));
    }
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("bad numeric value: " + std::string(raw));
  return db ? db_to_linear(v) : v;
}

inline std::optional<double> get_quantity(const ConfigMap& c,
                                          const std::string& key) {
  const auto it = c.find(key);
  if (it == c.end()) return std::nullopt;
  return parse_quantity(it->second);
}

inline double get_quantity_or(const ConfigMap& c, const std::string& key,
                              double fallback) {
  return get_quantity(c, key).value_or(fallback);
}

inline std::string get_string_or(const ConfigMap& c, const std::string& key,
                                 std::string fallback) {
  const auto it = c.find(key);
  return it == c.end() ? std::move(fallback) : it->second;
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

/// Minimal CSV emitter: fixed column order, LF endings, shortest round-trip
/// numbers, no quoting (values are numeric or simple identifiers).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) { line(names); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    line(cells);
  }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

} // namespace sqclock
