#include "nnkr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nnkr/errors.hpp"

namespace nnkr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.' || c == '-';
    });
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

std::optional<std::uint64_t> to_u64(const std::string& s) {
    std::uint64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
    return v;
}

std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value', got '" + text + "'");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (!valid_key(key)) {
            throw ConfigError(source + ":" + std::to_string(line) + ": invalid key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError(source + ":" + std::to_string(line) + ": key '" + key + "' has an empty value");
        }
        if (cfg.entries_.count(key)) {
            throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(cfg.entries_[key].line) + ")");
        }
        cfg.entries_[key] = {value, line};
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
    entries_[key] = {value, 0};
}

void Config::fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    if (it != entries_.end() && it->second.line > 0) {
        throw ConfigError(source_ + ":" + std::to_string(it->second.line) + ": " + key + ": " + message);
    }
    throw ConfigError(key + ": " + message);
}

const Config::Entry& Config::at(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    return it->second;
}

void Config::check_known(const std::set<std::string>& allowed) const {
    for (const auto& [key, entry] : entries_) {
        if (!allowed.count(key)) fail(key, "unknown key");
    }
}

void Config::require(const std::string& key) const {
    at(key);
}

std::string Config::get_string(const std::string& key) const {
    return at(key).value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).value : fallback;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const auto v = to_u64(at(key).value);
    if (!v) fail(key, "expected a nonnegative integer, got '" + at(key).value + "'");
    return *v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    return has(key) ? static_cast<std::size_t>(get_u64(key)) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto v = to_double(at(key).value);
    if (!v) fail(key, "expected a number, got '" + at(key).value + "'");
    return *v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = at(key).value;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
}

std::vector<std::size_t> Config::get_size_list(const std::string& key,
                                               const std::vector<std::size_t>& fallback) const {
    if (!has(key)) return fallback;
    try {
        return parse_size_list(at(key).value, key);
    } catch (const ConfigError& e) {
        fail(key, e.what());
    }
}

std::vector<double> Config::get_double_list(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    try {
        return parse_double_list(at(key).value, key);
    } catch (const ConfigError& e) {
        fail(key, e.what());
    }
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [key, entry] : entries_) out += key + "=" + entry.value + "\n";
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
    std::vector<std::size_t> out;
    for (const std::string& item : split(text, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            const auto v = to_u64(item);
            if (!v) throw ConfigError("bad integer '" + item + "' in " + what);
            out.push_back(static_cast<std::size_t>(*v));
            continue;
        }
        std::string rest = item.substr(dots + 2);
        std::uint64_t step = 1;
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            const auto st = to_u64(trim(rest.substr(colon + 1)));
            if (!st || *st == 0) throw ConfigError("bad step in range '" + item + "' in " + what);
            step = *st;
            rest = rest.substr(0, colon);
        }
        const auto lo = to_u64(trim(item.substr(0, dots)));
        const auto hi = to_u64(trim(rest));
        if (!lo || !hi || *lo > *hi) throw ConfigError("bad range '" + item + "' in " + what);
        for (std::uint64_t v = *lo; v <= *hi; v += step) out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ConfigError("empty list in " + what);
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const std::string& item : split(text, ',')) {
        const auto v = to_double(item);
        if (!v) throw ConfigError("bad number '" + item + "' in " + what);
        out.push_back(*v);
    }
    if (out.empty()) throw ConfigError("empty list in " + what);
    return out;
}

}  // namespace nnkr
