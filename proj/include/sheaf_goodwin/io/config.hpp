#ifndef SHEAF_GOODWIN_IO_CONFIG_HPP
#define SHEAF_GOODWIN_IO_CONFIG_HPP

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "../error.hpp"

namespace sheaf_goodwin {

/// Malformed config text or an unusable value.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A required key is absent. `key()` is "section.key".
class MissingKeyError : public ConfigError {
public:
  explicit MissingKeyError(std::string key) : ConfigError("missing key '" + key + "'"), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

} // namespace detail

/// `[section]` headers and `key = value` lines; `#` and `;` start comments.
///
/// Sections and keys keep file order. A repeated key within a section is an
/// error. Keys before any header land in the section "".
class Config {
public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };

  static Config parse(std::istream& in, const std::string& source = "<input>") {
    Config c;
    c.source_ = source;
    std::string raw;
    int lineno = 0;
    std::size_t cur = c.section_index("");
    while (std::getline(in, raw)) {
      ++lineno;
      std::string_view line = raw;
      if (auto h = line.find_first_of("#;"); h != std::string_view::npos) line = line.substr(0, h);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(source + ":" + std::to_string(lineno) + ": unterminated section header");
        const std::string name(detail::trim(line.substr(1, line.size() - 2)));
        if (name.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty section name");
        cur = c.section_index(name);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key(detail::trim(line.substr(0, eq)));
      const std::string value(detail::trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
      Section& sec = c.sections_[cur];
      for (const auto& e : sec.entries)
        if (e.key == key)
          throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + sec.name + "." + key + "'");
      sec.entries.push_back({key, value, lineno});
    }
    return c;
  }

  static Config parse_string(const std::string& text, const std::string& source = "<string>") {
    std::istringstream in(text);
    return parse(in, source);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return parse(in, path);
  }

  const std::string& source() const noexcept { return source_; }
  const std::vector<Section>& sections() const noexcept { return sections_; }

  bool has_section(const std::string& s) const { return find_section(s) != nullptr; }

  bool has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

  /// Entries of `section` in file order; empty when the section is absent.
  const std::vector<Entry>& entries(const std::string& section) const {
    static const std::vector<Entry> none;
    const Section* s = find_section(section);
    return s ? s->entries : none;
  }

  const std::string& get(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw MissingKeyError(section + "." + key);
    return e->value;
  }

  std::string get_or(const std::string& section, const std::string& key, std::string fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
  }

  double number(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw MissingKeyError(section + "." + key);
    return to_number(*e, section);
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    return e ? to_number(*e, section) : fallback;
  }

  /// Comma-separated numbers.
  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw MissingKeyError(section + "." + key);
    std::vector<double> out;
    std::string_view rest = e->value;
    while (true) {
      const auto comma = rest.find(',');
      const auto x = detail::parse_double(rest.substr(0, comma));
      if (!x) throw ConfigError(where(*e) + ": '" + section + "." + key + "' expects comma-separated numbers");
      out.push_back(*x);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  /// Inserts or replaces a value (command-line overrides).
  void set(const std::string& section, const std::string& key, std::string value) {
    Section& s = sections_[section_index(section)];
    for (auto& e : s.entries)
      if (e.key == key) {
        e.value = std::move(value);
        e.line = 0;
        return;
      }
    s.entries.push_back({key, std::move(value), 0});
  }

private:
  std::string where(const Entry& e) const {
    return e.line > 0 ? source_ + ":" + std::to_string(e.line) : std::string("override");
  }

  double to_number(const Entry& e, const std::string& section) const {
    const auto x = detail::parse_double(e.value);
    if (!x) throw ConfigError(where(e) + ": '" + section + "." + e.key + "' is not a number: '" + e.value + "'");
    return *x;
  }

  const Section* find_section(const std::string& name) const {
    for (const auto& s : sections_)
      if (s.name == name) return &s;
    return nullptr;
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    const Section* s = find_section(section);
    if (!s) return nullptr;
    for (const auto& e : s->entries)
      if (e.key == key) return &e;
    return nullptr;
  }

  std::size_t section_index(const std::string& name) {
    for (std::size_t i = 0; i < sections_.size(); ++i)
      if (sections_[i].name == name) return i;
    sections_.push_back({name, {}});
    return sections_.size() - 1;
  }

  std::string source_;
  std::vector<Section> sections_;
};

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_IO_CONFIG_HPP
