#include "common/kv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace pcsod {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw_usage("config line without '=': " + t);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw_usage("config line with empty key: " + t);
    if (out.count(key)) throw_usage("duplicate config key '" + key + "'");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

void require_exact_keys(const std::map<std::string, std::string>& values, const std::vector<std::string>& keys,
                        const std::string& what) {
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : values) {
    if (!known.count(k)) throw_usage("unknown " + what + " key '" + k + "'");
  }
  for (const auto& k : keys) {
    if (!values.count(k)) throw_usage("missing " + what + " key '" + k + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw_usage("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_size(key, trim(item)));
  if (out.empty()) throw_usage("config key '" + key + "': empty list");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw_usage("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw_usage("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_usage("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string format_real(double value) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general);
  return std::string(buf, r.ptr);
}

}  // namespace pcsod
