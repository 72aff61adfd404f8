#include "semeq/config.hpp"

#include "semeq/errors.hpp"
#include "semeq/util.hpp"

namespace semeq {

Config Config::parse(const std::string& text) {
    Config cfg;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": empty key");
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    return parse(read_text_file(path));
}

bool Config::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

std::optional<std::string> Config::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    double out = 0.0;
    if (!parse_double(*v, out)) {
        throw ParseError("config key '" + key + "': not a number: " + *v);
    }
    return out;
}

long Config::get_long(const std::string& key, long fallback) const {
    double d = get_double(key, static_cast<double>(fallback));
    return static_cast<long>(d);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    auto v = get(key);
    if (!v) return {};
    return split_list(*v);
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) {
        double d = 0.0;
        if (!parse_double(item, d)) {
            throw ParseError("config key '" + key + "': not a number: " + item);
        }
        out.push_back(d);
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

} // namespace semeq
