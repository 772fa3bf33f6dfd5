#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tamed {

/// Flat `key = value` text. One assignment per line, `#` starts a comment,
/// keys are [A-Za-z_][A-Za-z0-9_.]*, values run to end of line (trimmed).
/// Lists are comma separated. Duplicate keys are an error.
class FlatConfig {
public:
    FlatConfig() = default;

    /// Throws ConfigError with `source:line` context.
    static FlatConfig parse(const std::string& text, const std::string& source = "<string>");
    static FlatConfig load(const std::string& path);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;  ///< empty when absent

    /// Keys never read through a getter; used to reject typos.
    std::vector<std::string> unused_keys() const;
    /// Throws ConfigError naming the first unused key and its line.
    void reject_unused() const;

    /// Line number of a key (0 when set programmatically).
    int line_of(const std::string& key) const;
    const std::string& source() const noexcept { return source_; }

    /// Serialize in insertion order.
    std::string to_string() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    const Entry& entry(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::string source_ = "<string>";
    std::map<std::string, Entry> entries_;
    std::vector<std::string> order_;
    mutable std::set<std::string> used_;
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);
std::string format_doubles(const std::vector<double>& xs);

}  // namespace tamed
