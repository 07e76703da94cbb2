#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mcl {

/// `key = value` text with optional `[section]` headers and `#` comments.
/// Every entry remembers its line so validation errors can point at it.
class TextConfig {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
  };

  static TextConfig parse(const std::string& text, const std::string& source = "<text>");
  static TextConfig load(const std::string& path);

  [[nodiscard]] const std::string& source() const { return source_; }
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }

  [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
  [[nodiscard]] const Entry* find(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;

  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

  /// Error message of the form "source:line: message".
  [[noreturn]] void fail(const Entry& entry, const std::string& message) const;
  /// Throws if any entry in `section` is not in `known`.
  void reject_unknown(const std::string& section, const std::vector<std::string>& known) const;

 private:
  const Entry& require(const std::string& section, const std::string& key) const;

  std::string source_;
  std::vector<Entry> entries_;
};

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);
double parse_double(const std::string& text);

}  // namespace mcl
