#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nnkr {

/// key = value configuration. Lines are trimmed; '#' starts a comment; keys
/// are [A-Za-z0-9_.-]+ and may appear once. Lists are comma separated, and
/// integer ranges are written a..b or a..b:step (inclusive). Every error is a
/// ConfigError of the form "<source>:<line>: <message>".
class Config {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;  // 0 for values set programmatically (flags)
    };

    static Config parse(std::istream& in, const std::string& source = "<config>");
    /// Throws ConfigError when the file cannot be opened.
    static Config load(const std::string& path);

    /// Adds or overrides a value; overrides win over file contents.
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    /// Throws ConfigError naming the first key not in `allowed`.
    void check_known(const std::set<std::string>& allowed) const;
    /// Throws ConfigError naming the missing key.
    void require(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::size_t> get_size_list(const std::string& key, const std::vector<std::size_t>& fallback) const;
    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;

    /// Sorted "key=value\n" lines; the input of the config digest.
    std::string canonical() const;
    const std::map<std::string, Entry>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;
    const Entry& at(const std::string& key) const;

    std::map<std::string, Entry> entries_;
    std::string source_ = "<config>";
};

/// Parses "20,25,30", "8..10" or "20..150:10" (and mixtures "2,5..7").
/// Throws ConfigError with `what` in the message.
std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

}  // namespace nnkr
