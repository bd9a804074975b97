#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hrp {

// Flat `key = value` configuration document. Lines starting with '#' are
// comments. Keys use dotted paths (train.epochs, gp.amplitude). Typed getters
// record which keys were consumed so unknown keys can be rejected afterwards.
class FlatConfig {
public:
    static FlatConfig parse(std::istream& in);
    static FlatConfig parse_file(const std::string& path);

    void set(const std::string& key, const std::string& value); // CLI override

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
    // "auto" or absent -> nullopt; otherwise the numeric value.
    std::optional<double> get_auto_double(const std::string& key) const;

    // Keys present in the document but never consumed by a getter.
    std::vector<std::string> unknown_keys() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> touched_;
};

} // namespace hrp
