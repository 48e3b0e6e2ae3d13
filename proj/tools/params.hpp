#pragma once

// Binds CLI11 options to typed variables and keeps enough bookkeeping to
// (a) fill unset options from a "key = value" config file and (b) write the
// fully resolved configuration back out in the same format.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcml/kv.hpp"

namespace qcml::cli {

namespace detail {

inline std::string render(const std::string& v) { return v; }
inline std::string render(double v) { return format_double(v); }
template <class T>
    requires std::is_integral_v<T>
std::string render(T v) {
    return std::to_string(v);
}
inline std::string render(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
}

}  // namespace detail

class ParamSet {
public:
    explicit ParamSet(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& key, T& var, const std::string& help) {
        auto* opt = app_->add_option("--" + key, var, help)->capture_default_str();
        if constexpr (std::is_same_v<T, std::vector<std::string>>) opt->delimiter(',');
        entries_.push_back({key, opt, [&var] { return detail::render(var); }});
        return opt;
    }

    // Positional argument that may also be supplied from the config file.
    template <class T>
    CLI::Option* add_positional(const std::string& key, T& var, const std::string& help) {
        auto* opt = app_->add_option(key, var, help);
        entries_.push_back({key, opt, [&var] { return detail::render(var); }});
        return opt;
    }

    // Config values only fill options that were not given on the command line.
    void merge_config(const std::string& path) {
        const auto doc = KeyValueDoc::read(path);
        for (const auto& [key, value] : doc.entries()) {
            const Entry* e = find(key);
            if (!e) throw InvalidInput("config '" + path + "': unknown key '" + key + "' for command '" +
                                       app_->get_name() + "'");
            if (e->option->count() > 0) continue;
            e->option->add_result(value);
            try {
                e->option->run_callback();
            } catch (const CLI::Error& err) {
                throw InvalidInput("config '" + path + "': bad value for '" + key + "': " + err.what());
            }
        }
    }

    KeyValueDoc resolved() const {
        KeyValueDoc doc;
        for (const auto& e : entries_) doc.set(e.key, e.value());
        return doc;
    }

    bool given(const std::string& key) const {
        const Entry* e = find(key);
        return e && e->option->count() > 0;
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* option;
        std::function<std::string()> value;
    };

    const Entry* find(const std::string& key) const {
        for (const auto& e : entries_)
            if (e.key == key) return &e;
        return nullptr;
    }

    CLI::App* app_;
    std::vector<Entry> entries_;
};

}  // namespace qcml::cli
