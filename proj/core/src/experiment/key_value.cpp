#include "disent/experiment/key_value.hpp"

#include <fstream>
#include <sstream>

#include "disent/numerics/errors.hpp"

namespace disent::experiment {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& s) {
  const auto pos = s.find_first_of("#;");
  return pos == std::string::npos ? s : s.substr(0, pos);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ParseError("config line " + std::to_string(line) + ": " + message);
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(strip_comment(raw));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(line, "unterminated section header '" + text + "'");
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + text + "'");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) fail(line, "missing key before '='");
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) {
      fail(line, "duplicate key '" + full + "' (first set on line " + std::to_string(out[full].line) + ")");
    }
    out[full] = KeyValueEntry{unquote(trim(text.substr(eq + 1))), line};
  }
  return out;
}

KeyValues parse_key_values_string(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  return parse_key_values(in);
}

}  // namespace disent::experiment
