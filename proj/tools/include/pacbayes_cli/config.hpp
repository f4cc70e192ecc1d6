#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pacbayes::cli {

/// One `section.key = value` line of a configuration file.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line;
};

/// Flat configuration: `section.key = value` per line, `#` comments, blank
/// lines ignored, surrounding double quotes stripped from values. Keys must be
/// unique. Throws pacbayes::ParseError on malformed lines.
std::vector<ConfigEntry> parse_config(std::string_view text);
std::vector<ConfigEntry> load_config(const std::filesystem::path& path);

}  // namespace pacbayes::cli
