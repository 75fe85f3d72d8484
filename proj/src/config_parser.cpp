#include "mgsim/config_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mgsim {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& s) {
  size_t pos = s.find('#');
  return pos == std::string::npos ? s : s.substr(0, pos);
}

}  // namespace

const ConfigEntry* ConfigSection::find(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) {
      e.consumed = true;
      return &e;
    }
  return nullptr;
}

std::string ConfigSection::require(const std::string& path, const std::string& key) const {
  const ConfigEntry* e = find(key);
  if (!e)
    throw ConfigError(path, line,
                      "section [" + kind + (name.empty() ? "" : " " + name) +
                          "] is missing required key '" + key + "'");
  return e->value;
}

std::optional<std::string> ConfigSection::optional(const std::string& key) const {
  const ConfigEntry* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

double ConfigSection::require_double(const std::string& path, const std::string& key) const {
  const ConfigEntry* e = find(key);
  if (!e)
    throw ConfigError(path, line,
                      "section [" + kind + (name.empty() ? "" : " " + name) +
                          "] is missing required key '" + key + "'");
  return parse_double(path, e->line, e->value);
}

double ConfigSection::get_double(const std::string& path, const std::string& key,
                                 double fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  return parse_double(path, e->line, e->value);
}

int ConfigSection::get_int(const std::string& path, const std::string& key,
                           int fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  try {
    size_t used = 0;
    int v = std::stoi(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path, e->line, "expected integer for '" + key + "', got '" + e->value + "'");
  }
}

bool ConfigSection::get_bool(const std::string& path, const std::string& key,
                             bool fallback) const {
  const ConfigEntry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "on" || e->value == "1") return true;
  if (e->value == "false" || e->value == "off" || e->value == "0") return false;
  throw ConfigError(path, e->line, "expected boolean for '" + key + "', got '" + e->value + "'");
}

std::string ConfigSection::get_string(const std::string& key,
                                      const std::string& fallback) const {
  const ConfigEntry* e = find(key);
  return e ? e->value : fallback;
}

void ConfigSection::check_all_consumed(const std::string& path) const {
  for (const auto& e : entries)
    if (!e.consumed)
      throw ConfigError(path, e.line,
                        "unknown key '" + e.key + "' in section [" + kind +
                            (name.empty() ? "" : " " + name) + "]");
}

const ConfigSection* ConfigDocument::find(const std::string& kind,
                                          const std::string& name) const {
  for (const auto& s : sections)
    if (s.kind == kind && s.name == name) return &s;
  return nullptr;
}

std::vector<const ConfigSection*> ConfigDocument::find_all(const std::string& kind) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.kind == kind) out.push_back(&s);
  return out;
}

ConfigDocument parse_config_text(const std::string& text, const std::string& path,
                                 const std::vector<std::string>& raw_sections) {
  ConfigDocument doc;
  doc.path = path;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  ConfigSection* current = nullptr;
  bool current_raw = false;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(path, lineno, "malformed section header: " + s);
      std::string inside = trim(s.substr(1, s.size() - 2));
      if (inside.empty()) throw ConfigError(path, lineno, "empty section header");
      ConfigSection sec;
      sec.line = lineno;
      size_t sp = inside.find_first_of(" \t");
      if (sp == std::string::npos) {
        sec.kind = inside;
      } else {
        sec.kind = inside.substr(0, sp);
        sec.name = trim(inside.substr(sp));
      }
      doc.sections.push_back(std::move(sec));
      current = &doc.sections.back();
      current_raw = std::find(raw_sections.begin(), raw_sections.end(), current->kind) !=
                    raw_sections.end();
      continue;
    }

    if (!current)
      throw ConfigError(path, lineno, "entry before any [section] header: " + s);

    if (current_raw) {
      current->raw_lines.emplace_back(lineno, s);
      continue;
    }

    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path, lineno, "expected 'key = value', got: " + s);
    ConfigEntry entry;
    entry.key = trim(s.substr(0, eq));
    entry.value = trim(s.substr(eq + 1));
    entry.line = lineno;
    if (entry.key.empty()) throw ConfigError(path, lineno, "empty key");
    if (entry.value.empty())
      throw ConfigError(path, lineno, "empty value for key '" + entry.key + "'");
    for (const auto& prev : current->entries)
      if (prev.key == entry.key)
        throw ConfigError(path, lineno, "duplicate key '" + entry.key + "' (first at line " +
                                            std::to_string(prev.line) + ")");
    current->entries.push_back(std::move(entry));
  }
  return doc;
}

ConfigDocument parse_config_file(const std::string& path,
                                 const std::vector<std::string>& raw_sections) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, raw_sections);
}

double parse_double(const std::string& path, int line, const std::string& text) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(path, line, "expected number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace mgsim
