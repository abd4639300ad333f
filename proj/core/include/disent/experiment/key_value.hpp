#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace disent::experiment {

// A flat key -> value configuration. `[section]` headers prefix subsequent keys
// as `section.key`; `#` and `;` start comments; blank lines are ignored.
struct KeyValueEntry {
  std::string value;
  std::size_t line = 0;  // 1-based source line, 0 for programmatic overrides
};

using KeyValues = std::map<std::string, KeyValueEntry>;

// Throws ParseError naming the line of a malformed or duplicated entry.
KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values_string(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

}  // namespace disent::experiment
