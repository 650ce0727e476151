#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcred/io.hpp"

namespace bcred {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/* Flat key-value configuration. One `section.key = value` pair per line,
 * `#` starts a comment, blank lines are ignored. Keys are unique; reads are
 * tracked so callers can reject keys no component consumed. Serialization
 * is canonical: keys in sorted order, one space around `=`. */
class Config {
  public:
    Config() = default;

    static Config parse_string(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string stripped = strip(line);
            if (stripped.empty() || stripped[0] == '#')
                continue;
            const std::size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected `key = value`, got `" + stripped + "`");
            const std::string key = strip(stripped.substr(0, eq));
            const std::string value = strip(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            for (const char ch : key)
                if (std::isspace(static_cast<unsigned char>(ch)))
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": key `" + key + "` contains whitespace");
            if (cfg.values_.count(key))
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": duplicate key `" + key + "`");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set_double(const std::string& key, double value) {
        values_[key] = detail::format_double(value);
    }
    void set_uint(const std::string& key, std::uint64_t value) {
        values_[key] = std::to_string(value);
    }
    void set_bool(const std::string& key, bool value) {
        values_[key] = value ? "true" : "false";
    }

    const std::string& get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing required key `" + key + "`");
        used_.insert(key);
        return it->second;
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) const {
        const std::string& raw = get_string(key);
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (raw.empty() || end != raw.c_str() + raw.size())
            throw ConfigError("key `" + key + "`: `" + raw + "` is not a number");
        return v;
    }

    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    std::uint64_t get_uint(const std::string& key) const {
        const std::string& raw = get_string(key);
        if (raw.empty() || raw.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("key `" + key + "`: `" + raw +
                              "` is not a nonnegative integer");
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
        if (errno != 0 || end != raw.c_str() + raw.size())
            throw ConfigError("key `" + key + "`: `" + raw + "` is out of range");
        return static_cast<std::uint64_t>(v);
    }

    std::uint64_t get_uint_or(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? get_uint(key) : fallback;
    }

    bool get_bool(const std::string& key) const {
        const std::string& raw = get_string(key);
        if (raw == "true") return true;
        if (raw == "false") return false;
        throw ConfigError("key `" + key + "`: expected `true` or `false`, got `" + raw + "`");
    }

    bool get_bool_or(const std::string& key, bool fallback) const {
        return has(key) ? get_bool(key) : fallback;
    }

    void mark_used(const std::string& key) const { used_.insert(key); }

    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [key, value] : values_)
            if (!used_.count(key))
                out.push_back(key);
        return out;
    }

    void require_all_used() const {
        const std::vector<std::string> leftover = unused_keys();
        if (!leftover.empty())
            throw ConfigError("unknown key `" + leftover.front() + "`");
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        for (const auto& [key, value] : values_)
            out.push_back(key);
        return out;
    }

    std::string serialize() const {
        std::string out;
        for (const auto& [key, value] : values_) {
            out += key;
            out += " = ";
            out += value;
            out += '\n';
        }
        return out;
    }

    void write_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw ConfigError("cannot open file for writing: " + path);
        out << serialize();
        if (!out)
            throw ConfigError("failed writing file: " + path);
    }

  private:
    static std::string strip(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

} // namespace bcred
