#include "heatopt/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

#include "heatopt/mesh.hpp"

namespace heatopt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum((unsigned char)c) || c == '_'; });
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    int x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
    return x;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(',', start);
        const std::string item = trim(s.substr(start, p == std::string::npos ? std::string::npos : p - start));
        if (!item.empty()) out.push_back(item);
        if (p == std::string::npos) break;
        start = p + 1;
    }
    return out;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& origin) {
    KeyValueConfig c;
    std::string section, line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) throw ConfigError(where + "bad section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_name(key)) throw ConfigError(where + "bad key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (c.has(full)) throw ConfigError(where + "duplicate key '" + full + "'");
        c.set(full, trim(line.substr(eq + 1)));
    }
    return c;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse(in, path);
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
    const auto s = get_string(key);
    if (!s) return std::nullopt;
    return to_double(key, *s);
}

std::optional<int> KeyValueConfig::get_int(const std::string& key) const {
    const auto s = get_string(key);
    if (!s) return std::nullopt;
    return to_int(key, *s);
}

std::optional<std::vector<double>> KeyValueConfig::get_doubles(const std::string& key) const {
    const auto s = get_string(key);
    if (!s) return std::nullopt;
    std::vector<double> v;
    for (const auto& item : split_list(*s)) v.push_back(to_double(key, item));
    return v;
}

std::optional<std::vector<int>> KeyValueConfig::get_ints(const std::string& key) const {
    const auto s = get_string(key);
    if (!s) return std::nullopt;
    std::vector<int> v;
    for (const auto& item : split_list(*s)) v.push_back(to_int(key, item));
    return v;
}

void KeyValueConfig::require_known(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : values_)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw ConfigError("unknown config key '" + k + "'");
}

}  // namespace heatopt
