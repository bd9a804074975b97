#include "hrp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hrp/errors.hpp"
#include "hrp/util.hpp"

namespace hrp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

FlatConfig FlatConfig::parse(std::istream& in) {
    FlatConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line is not 'key = value'", line_no);
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError("config line has an empty key", line_no);
        cfg.values_[key] = value;
    }
    return cfg;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
}

void FlatConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool FlatConfig::has(const std::string& key) const {
    touched_.insert(key);
    return values_.count(key) > 0;
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int FlatConfig::get_int(const std::string& key, int fallback) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    int v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "' expects an integer, got '" + s + "'");
    return v;
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" + s + "'");
    return v;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    bool ok = false;
    const double v = parse_double(it->second, ok);
    if (!ok)
        throw ConfigError("config key '" + key + "' expects a number, got '" + it->second + "'");
    return v;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    throw ConfigError("config key '" + key + "' expects a boolean, got '" + s + "'");
}

std::vector<int> FlatConfig::get_int_list(const std::string& key,
                                          const std::vector<int>& fallback) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) continue;
        int v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size())
            throw ConfigError("config key '" + key + "' expects integers, got '" + t + "'");
        out.push_back(v);
    }
    return out;
}

std::optional<double> FlatConfig::get_auto_double(const std::string& key) const {
    touched_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end() || it->second == "auto") return std::nullopt;
    bool ok = false;
    const double v = parse_double(it->second, ok);
    if (!ok)
        throw ConfigError("config key '" + key + "' expects a number or 'auto', got '" +
                          it->second + "'");
    return v;
}

std::vector<std::string> FlatConfig::unknown_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, _] : values_)
        if (!touched_.count(key)) out.push_back(key);
    return out;
}

} // namespace hrp
