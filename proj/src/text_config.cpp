#include "mcl/text_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mcl/error.hpp"

namespace mcl {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return {buf, ptr};
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ValidationError("not a number: '" + text + "'");
  }
  return v;
}

TextConfig TextConfig::parse(const std::string& text, const std::string& source) {
  TextConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (e.key.empty()) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (cfg.find(e.section, e.key) != nullptr) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate key '" + e.key +
                            "'");
    }
    cfg.entries_.push_back(std::move(e));
  }
  return cfg;
}

TextConfig TextConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const TextConfig::Entry* TextConfig::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section == section && e.key == key) {
      return &e;
    }
  }
  return nullptr;
}

bool TextConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void TextConfig::fail(const Entry& entry, const std::string& message) const {
  throw ValidationError(source_ + ":" + std::to_string(entry.line) + ": " + entry.key + ": " +
                        message);
}

const TextConfig::Entry& TextConfig::require(const std::string& section,
                                             const std::string& key) const {
  if (const auto* e = find(section, key)) {
    return *e;
  }
  const std::string where = section.empty() ? key : "[" + section + "] " + key;
  throw ValidationError(source_ + ": missing required key " + where);
}

void TextConfig::reject_unknown(const std::string& section,
                                const std::vector<std::string>& known) const {
  for (const auto& e : entries_) {
    if (e.section == section && std::find(known.begin(), known.end(), e.key) == known.end()) {
      fail(e, "unknown key");
    }
  }
}

std::string TextConfig::get_string(const std::string& section, const std::string& key) const {
  return require(section, key).value;
}

double TextConfig::get_double(const std::string& section, const std::string& key) const {
  const auto& e = require(section, key);
  try {
    const double v = parse_double(e.value);
    if (!std::isfinite(v)) {
      fail(e, "value must be finite");
    }
    return v;
  } catch (const ValidationError&) {
    fail(e, "expected a number, got '" + e.value + "'");
  }
}

std::int64_t TextConfig::get_int(const std::string& section, const std::string& key) const {
  const auto& e = require(section, key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc{} || ptr != e.value.data() + e.value.size() || e.value.empty()) {
    fail(e, "expected an integer, got '" + e.value + "'");
  }
  return v;
}

std::uint64_t TextConfig::get_u64(const std::string& section, const std::string& key) const {
  const auto& e = require(section, key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc{} || ptr != e.value.data() + e.value.size() || e.value.empty()) {
    fail(e, "expected an unsigned integer, got '" + e.value + "'");
  }
  return v;
}

bool TextConfig::get_bool(const std::string& section, const std::string& key) const {
  const auto& e = require(section, key);
  if (e.value == "true" || e.value == "1" || e.value == "yes") {
    return true;
  }
  if (e.value == "false" || e.value == "0" || e.value == "no") {
    return false;
  }
  fail(e, "expected true/false, got '" + e.value + "'");
}

std::string TextConfig::get_string_or(const std::string& section, const std::string& key,
                                      const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double TextConfig::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t TextConfig::get_int_or(const std::string& section, const std::string& key,
                                    std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool TextConfig::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
  return has(section, key) ? get_bool(section, key) : fallback;
}

}  // namespace mcl
