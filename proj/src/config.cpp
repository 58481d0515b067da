#include "twinrange/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace twinrange::io {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << what;
  throw ConfigError(os.str());
}

std::string strip(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Removes a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& tok, double& out) {
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

Config::Value parse_scalar(const std::string& tok, const std::string& origin,
                           int line) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  if (tok == "true") return true;
  if (tok == "false") return false;
  double d = 0.0;
  if (parse_number(tok, d)) return d;
  fail(origin, line, "cannot parse value '" + tok + "'");
}

Config::Value parse_value(const std::string& raw, const std::string& origin,
                          int line) {
  const std::string tok = strip(raw);
  if (tok.empty()) fail(origin, line, "missing value");
  if (tok.front() == '[') {
    if (tok.back() != ']') fail(origin, line, "unterminated array");
    const std::string inner = tok.substr(1, tok.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        items.push_back(strip(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!strip(cur).empty()) items.push_back(strip(cur));
    if (items.empty()) return std::vector<double>{};
    if (!items.front().empty() && items.front().front() == '"') {
      std::vector<std::string> out;
      for (const auto& it : items) {
        auto v = parse_scalar(it, origin, line);
        if (!std::holds_alternative<std::string>(v))
          fail(origin, line, "mixed array element types");
        out.push_back(std::get<std::string>(v));
      }
      return out;
    }
    std::vector<double> out;
    for (const auto& it : items) {
      auto v = parse_scalar(it, origin, line);
      if (!std::holds_alternative<double>(v))
        fail(origin, line, "mixed array element types");
      out.push_back(std::get<double>(v));
    }
    return out;
  }
  return parse_scalar(tok, origin, line);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  cfg.hash_ = fnv1a64(text);

  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = strip(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        fail(origin, lineno, "malformed section header '" + s + "'");
      section = strip(s.substr(1, s.size() - 2));
      if (section.find('.') != std::string::npos)
        fail(origin, lineno, "nested tables are not supported");
      cfg.tables_[section];
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(origin, lineno, "expected 'key = value', got '" + s + "'");
    const std::string key = strip(s.substr(0, eq));
    if (key.empty()) fail(origin, lineno, "empty key");
    auto& table = cfg.tables_[section];
    if (table.count(key))
      fail(origin, lineno, "duplicate key '" + key + "'");
    table[key] = parse_value(s.substr(eq + 1), origin, lineno);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const Config::Value* Config::find(const std::string& section,
                                  const std::string& key) const {
  const auto t = tables_.find(section);
  if (t == tables_.end()) return nullptr;
  const auto k = t->second.find(key);
  return k == t->second.end() ? nullptr : &k->second;
}

void Config::missing(const std::string& section, const std::string& key) const {
  throw ConfigError(origin_ + ": missing required key [" + section + "] " + key);
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  out.reserve(tables_.size());
  for (const auto& [name, _] : tables_) out.push_back(name);
  return out;
}

double Config::get_double(const std::string& section,
                          const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) missing(section, key);
  if (const double* d = std::get_if<double>(v)) return *d;
  throw ConfigError(origin_ + ": [" + section + "] " + key +
                    " must be a number");
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t Config::get_int(const std::string& section,
                             const std::string& key) const {
  const double d = get_double(section, key);
  const auto i = static_cast<std::int64_t>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError(origin_ + ": [" + section + "] " + key +
                      " must be an integer");
  return i;
}

std::int64_t Config::get_int_or(const std::string& section,
                                const std::string& key,
                                std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (const bool* b = std::get_if<bool>(v)) return *b;
  throw ConfigError(origin_ + ": [" + section + "] " + key +
                    " must be true or false");
}

std::string Config::get_string(const std::string& section,
                               const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) missing(section, key);
  if (const std::string* s = std::get_if<std::string>(v)) return *s;
  throw ConfigError(origin_ + ": [" + section + "] " + key +
                    " must be a quoted string");
}

std::string Config::get_string_or(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

std::vector<double> Config::get_double_array(const std::string& section,
                                             const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) missing(section, key);
  if (const auto* a = std::get_if<std::vector<double>>(v)) return *a;
  throw ConfigError(origin_ + ": [" + section + "] " + key +
                    " must be an array of numbers");
}

std::vector<double> Config::get_double_array_or(
    const std::string& section, const std::string& key,
    std::vector<double> fallback) const {
  return has(section, key) ? get_double_array(section, key)
                           : std::move(fallback);
}

}  // namespace twinrange::io
