#include "posefit/toml.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "posefit/errors.hpp"

namespace posefit {

bool TomlValue::as_bool() const {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw ParseError("TOML value is not a boolean");
}
double TomlValue::as_double() const {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw ParseError("TOML value is not a number");
}
long long TomlValue::as_int() const {
  return static_cast<long long>(as_double());
}
const std::string& TomlValue::as_string() const {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw ParseError("TOML value is not a string");
}
const std::vector<double>& TomlValue::as_array() const {
  if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
  throw ParseError("TOML value is not an array");
}

bool TomlDoc::has(const std::string& key) const {
  return values_.count(key) > 0;
}
const TomlValue& TomlDoc::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ParseError("missing TOML key: " + key);
  return it->second;
}
bool TomlDoc::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool() : fallback;
}
double TomlDoc::get_double(const std::string& key, double fallback) const {
  return has(key) ? at(key).as_double() : fallback;
}
long long TomlDoc::get_int(const std::string& key, long long fallback) const {
  return has(key) ? at(key).as_int() : fallback;
}
std::string TomlDoc::get_string(const std::string& key,
                                const std::string& fallback) const {
  return has(key) ? at(key).as_string() : fallback;
}
void TomlDoc::set(const std::string& key, TomlValue value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = std::move(value);
}
void TomlDoc::add_section(const std::string& name) {
  if (std::find(sections_.begin(), sections_.end(), name) == sections_.end())
    sections_.push_back(name);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ParseError("TOML parse error at line " + std::to_string(line) + ": " +
                   msg);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_scalar(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.empty()) fail(line, "empty value");
  if (s == "true") return {true};
  if (s == "false") return {false};
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      char c = s[i];
      if (c == '\\' && i + 2 < s.size()) {
        const char n = s[++i];
        c = n == 'n' ? '\n' : n == 't' ? '\t' : n;
      }
      out.push_back(c);
    }
    return {out};
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "unterminated array");
    std::vector<double> arr;
    std::stringstream ss(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      char* end = nullptr;
      const double d = std::strtod(t.c_str(), &end);
      if (end != t.c_str() + t.size()) fail(line, "bad array element: " + t);
      arr.push_back(d);
    }
    return {arr};
  }
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) fail(line, "unrecognized value: " + s);
  return {d};
}

}  // namespace

TomlDoc parse_toml_string(const std::string& text) {
  TomlDoc doc;
  std::stringstream ss(text);
  std::string raw;
  std::string prefix;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated table header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name)) fail(lineno, "bad table name: " + name);
      prefix = name;
      doc.add_section(name);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail(lineno, "bad key: " + key);
    const std::string dotted = prefix.empty() ? key : prefix + "." + key;
    doc.set(dotted, parse_scalar(line.substr(eq + 1), lineno));
  }
  return doc;
}

TomlDoc parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml_string(ss.str());
}

}  // namespace posefit
