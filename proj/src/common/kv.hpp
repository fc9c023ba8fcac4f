#pragma once

#include <map>
#include <string>
#include <vector>

namespace pcsod {

// Flat key=value text; '#' starts a comment line. Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// Checks that `values` holds exactly `keys`: unknown or missing keys throw
// Error(Usage) naming the key.
void require_exact_keys(const std::map<std::string, std::string>& values, const std::vector<std::string>& keys,
                        const std::string& what);

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value);
std::size_t parse_size(const std::string& key, const std::string& value);
double parse_real(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::string join_sizes(const std::vector<std::size_t>& values);
// Shortest text that parses back to exactly `value`.
std::string format_real(double value);

std::string read_text_file(const std::string& path);

}  // namespace pcsod
