#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bastar/common.hpp"

namespace bastar {

// Flat `key = value` config files with `#` comments and [section] headers.
// Keys are addressed as "section.key"; keys before any header live in "".
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const; // comma separated

    const std::map<std::string, std::string>& raw() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

} // namespace bastar
