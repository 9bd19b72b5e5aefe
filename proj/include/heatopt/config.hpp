#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heatopt {

/// Flat key = value text with [section] headers; keys are stored as "section.key".
/// '#' starts a comment, blank lines are ignored.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, const std::string& origin = "<config>");
    static KeyValueConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    /// Typed access; a present but malformed value throws ConfigError naming the key.
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<int> get_int(const std::string& key) const;
    std::optional<std::vector<double>> get_doubles(const std::string& key) const;
    std::optional<std::vector<int>> get_ints(const std::string& key) const;

    /// Throws ConfigError for keys outside the allowed set.
    void require_known(const std::vector<std::string>& allowed) const;

private:
    std::map<std::string, std::string> values_;
};

/// Comma separated list, whitespace trimmed.
std::vector<std::string> split_list(const std::string& s);

}  // namespace heatopt
