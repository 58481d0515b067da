#pragma once
// Minimal TOML-subset reader for run configs and data files.
//
// Supported: [section] headers, key = value pairs, # comments, blank lines.
// Values: double-quoted strings, booleans, numbers (incl. scientific
// notation), and flat arrays [v1, v2, ...] of numbers or strings.
// That subset covers every config this project ships; nested tables,
// datetimes and multi-line strings are rejected with a clear error.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace twinrange::io {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  using Value = std::variant<bool, double, std::string, std::vector<double>,
                             std::vector<std::string>>;

  static Config parse_file(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;

  // Typed getters; throw ConfigError naming section.key when missing or of
  // the wrong type. The *_or variants substitute a default when absent.
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key,
                   bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  std::vector<double> get_double_array(const std::string& section,
                                       const std::string& key) const;
  std::vector<double> get_double_array_or(const std::string& section,
                                          const std::string& key,
                                          std::vector<double> fallback) const;

  // FNV-1a over the raw file text; stamped into every output artifact.
  std::uint64_t content_hash() const { return hash_; }
  const std::string& origin() const { return origin_; }

 private:
  const Value* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void missing(const std::string& section,
                            const std::string& key) const;

  std::map<std::string, std::map<std::string, Value>> tables_;
  std::string origin_;
  std::uint64_t hash_ = 0;
};

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace twinrange::io
