#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace expint::cli {

struct ConfigEntry {
    std::string key; // normalized: no leading dashes, '_' replaced by '-'
    std::string value;
    std::size_t line = 0;
};

/// Flat `key = value` file; blank lines and lines starting with '#' are skipped.
/// Throws ConfigError for malformed lines or repeated keys.
std::vector<ConfigEntry> read_flat_config(const std::filesystem::path& path);

/// Splits "a,b,c" into trimmed, non-empty parts.
std::vector<std::string> split_list(const std::string& s);

/// "N" or "NX,NY,NZ"; throws ConfigError otherwise.
std::array<int, 3> parse_grid(const std::string& s);

} // namespace expint::cli
