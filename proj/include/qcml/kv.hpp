#pragma once

// Line-oriented "key = value" documents used for sidecars, reports and
// resolved run configs. Doubles are written with 17 significant digits.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "qcml/errors.hpp"

namespace qcml {

// Shortest text that reads back to the same double (never more than 17
// significant digits).
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class KeyValueDoc {
public:
    void set(const std::string& key, std::string value) {
        for (auto& [k, v] : entries_)
            if (k == key) {
                v = std::move(value);
                return;
            }
        entries_.emplace_back(key, std::move(value));
    }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, unsigned long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, unsigned long long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return v;
        return std::nullopt;
    }
    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw ParseError("missing key '" + key + "'");
        return *v;
    }
    double require_double(const std::string& key) const {
        auto v = parse_double(require(key));
        if (!v) throw ParseError("key '" + key + "' is not a number");
        return *v;
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write '" + path + "'");
        f << str();
    }

    static KeyValueDoc parse(const std::string& text) {
        KeyValueDoc doc;
        std::istringstream in(text);
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            ++row;
            line = trim(line);
            if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected 'key = value' on line " + std::to_string(row), row);
            doc.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return doc;
    }

    static KeyValueDoc read(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw Error("cannot open '" + path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace qcml
