#pragma once

// INI experiment configs: "[section]" headers, "key = value" lines and ';'
// or '#' comment lines. Keys are addressed as "section.key".

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace dbarlab {

class Config {
 public:
  Config() = default;
  /// ConfigError on unreadable files and malformed lines (with line number).
  static Config load(const std::string& path);
  static Config parse(const std::string& text);

  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Comma-separated numbers; "1/64" style fractions are accepted.
  std::vector<double> numbers(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  /// Keys and values of one section in file order; empty if absent.
  std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;

 private:
  boost::property_tree::ptree tree_;
};

/// A real number or a fraction "p/q". ConfigError on anything else.
double parse_number(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

/// The grid ladder must be non-empty, positive and strictly decreasing.
void validate_ladder(const std::vector<double>& h);

}  // namespace dbarlab
