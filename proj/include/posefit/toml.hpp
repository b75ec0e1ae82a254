#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace posefit {

// Minimal TOML reader covering what the config and object files use:
// [table] / [table.sub] headers, bare keys, strings, numbers, booleans,
// flat arrays, and # comments. Unknown syntax is a ParseError with the
// offending line number.
struct TomlValue {
  std::variant<bool, double, std::string, std::vector<double>> v;

  bool as_bool() const;
  double as_double() const;
  long long as_int() const;
  const std::string& as_string() const;
  const std::vector<double>& as_array() const;
};

class TomlDoc {
 public:
  bool has(const std::string& dotted_key) const;
  const TomlValue& at(const std::string& dotted_key) const;

  bool get_bool(const std::string& key, bool fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

  // Section headers in file order.
  const std::vector<std::string>& sections() const { return sections_; }
  // All keys, dotted, in file order.
  const std::vector<std::string>& keys() const { return order_; }

  void set(const std::string& dotted_key, TomlValue value);
  void add_section(const std::string& name);

 private:
  std::map<std::string, TomlValue> values_;
  std::vector<std::string> order_;
  std::vector<std::string> sections_;
};

TomlDoc parse_toml_string(const std::string& text);
TomlDoc parse_toml_file(const std::string& path);

}  // namespace posefit
