#include "dbarlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dbarlab/error.hpp"

namespace dbarlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double plain_number(const std::string& t, const std::string& whole) {
  double v = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("not a number: '" + whole + "'");
  return v;
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty number");
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    const double p = plain_number(trim(t.substr(0, slash)), t);
    const double q = plain_number(trim(t.substr(slash + 1)), t);
    if (q == 0.0) throw ConfigError("zero denominator in '" + t + "'");
    return p / q;
  }
  return plain_number(t, t);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  return out;
}

void validate_ladder(const std::vector<double>& h) {
  if (h.empty()) throw ConfigError("grid ladder is empty");
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0)) throw ConfigError("grid spacings must be positive");
    if (k > 0 && !(h[k] < h[k - 1])) throw ConfigError("grid ladder must be strictly decreasing");
  }
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Config Config::parse(const std::string& text) {
  // '#' comments are not part of the INI reader's grammar; map them to ';'.
  std::stringstream in(text), cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    cleaned << (!t.empty() && t[0] == '#' ? ";" + t : line) << '\n';
  }
  Config c;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  return c;
}

std::optional<std::string> Config::find(const std::string& key) const {
  if (auto v = tree_.get_optional<std::string>(key)) return trim(*v);
  return std::nullopt;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::string Config::require(const std::string& key) const {
  auto v = find(key);
  if (!v || v->empty()) throw ConfigError("missing config key '" + key + "'");
  return *v;
}

double Config::number(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    return parse_number(*v);
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

int Config::integer(const std::string& key, int fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    throw ConfigError("key '" + key + "': not an integer: '" + *v + "'");
  return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + *v + "'");
}

std::vector<double> Config::numbers(const std::string& key) const {
  const auto v = find(key);
  if (!v) return {};
  try {
    return parse_number_list(*v);
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

std::vector<std::pair<std::string, std::string>> Config::section(const std::string& name) const {
  std::vector<std::pair<std::string, std::string>> out;
  if (const auto child = tree_.get_child_optional(name))
    for (const auto& [key, node] : *child) out.emplace_back(key, trim(node.data()));
  return out;
}

}  // namespace dbarlab
