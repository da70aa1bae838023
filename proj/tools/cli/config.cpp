#include "config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include "expint/errors.hpp"

namespace expint::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<ConfigEntry> read_flat_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::vector<ConfigEntry> out;
    std::set<std::string> seen;
    std::string line;
    for (std::size_t n = 1; std::getline(is, line); ++n) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        key.erase(0, key.find_first_not_of('-'));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.empty()) throw ConfigError(path.string() + ":" + std::to_string(n) + ": empty key");
        if (!seen.insert(key).second) {
            throw ConfigError(path.string() + ":" + std::to_string(n) + ": key '" + key + "' repeated");
        }
        std::string value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        out.push_back({std::move(key), std::move(value), n});
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string::npos ? s.size() : comma;
        std::string part = trim(s.substr(start, end - start));
        if (!part.empty()) out.push_back(std::move(part));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::array<int, 3> parse_grid(const std::string& s) {
    const auto parts = split_list(s);
    if (parts.size() != 1 && parts.size() != 3) {
        throw ConfigError("grid must be N or NX,NY,NZ, got '" + s + "'");
    }
    std::array<int, 3> g{};
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string& p = parts[parts.size() == 1 ? 0 : i];
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(p, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != p.size() || v < 1 || v > (1L << 20)) throw ConfigError("bad grid extent '" + p + "'");
        g[i] = static_cast<int>(v);
    }
    return g;
}

} // namespace expint::cli
