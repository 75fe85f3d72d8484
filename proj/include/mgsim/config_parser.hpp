#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgsim {

/// Error with file/line/section context for scenario files.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, int line, const std::string& what_arg)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what_arg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
  mutable bool consumed = false;
};

/// One `[kind name]` block; plain `[kind]` sections have an empty name.
/// The events section keeps raw lines instead of key = value entries.
struct ConfigSection {
  std::string kind;
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;
  std::vector<std::pair<int, std::string>> raw_lines;

  const ConfigEntry* find(const std::string& key) const;
  std::string require(const std::string& path, const std::string& key) const;
  std::optional<std::string> optional(const std::string& key) const;

  double require_double(const std::string& path, const std::string& key) const;
  double get_double(const std::string& path, const std::string& key, double fallback) const;
  int get_int(const std::string& path, const std::string& key, int fallback) const;
  bool get_bool(const std::string& path, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Throws on entries never consumed by any getter (schema check).
  void check_all_consumed(const std::string& path) const;
};

struct ConfigDocument {
  std::string path;
  std::vector<ConfigSection> sections;

  const ConfigSection* find(const std::string& kind, const std::string& name = "") const;
  std::vector<const ConfigSection*> find_all(const std::string& kind) const;
};

/// Parses an INI-style scenario document. Sections: [kind] or [kind name];
/// entries: key = value; '#' starts a comment; sections listed in
/// `raw_sections` keep whitespace-split raw lines instead.
ConfigDocument parse_config_text(const std::string& text, const std::string& path,
                                 const std::vector<std::string>& raw_sections = {"events"});
ConfigDocument parse_config_file(const std::string& path,
                                 const std::vector<std::string>& raw_sections = {"events"});

double parse_double(const std::string& path, int line, const std::string& text);
std::vector<std::string> split_ws(const std::string& text);

}  // namespace mgsim
