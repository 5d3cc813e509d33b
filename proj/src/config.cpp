#include "dsoar/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsoar {

namespace {

std::string trim(const std::string &s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

Config Config::from_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string &text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

const std::string &Config::raw(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

double Config::get_double(const std::string &key) const {
    const std::string &text = raw(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception &) {
        throw ConfigError("config key " + key + " is not a number: '" + text + "'");
    }
}

std::int64_t Config::get_int(const std::string &key) const {
    const std::string &text = raw(key);
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception &) {
        throw ConfigError("config key " + key + " is not an integer: '" + text + "'");
    }
}

bool Config::get_bool(const std::string &key) const {
    const std::string &text = raw(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("config key " + key + " is not a boolean: '" + text + "'");
}

std::string Config::get_string(const std::string &key) const { return raw(key); }

double Config::get_or(const std::string &key, double def) {
    if (!has(key)) set_double(key, def);
    return get_double(key);
}

std::int64_t Config::get_or(const std::string &key, std::int64_t def) {
    if (!has(key)) set_int(key, def);
    return get_int(key);
}

bool Config::get_or(const std::string &key, bool def) {
    if (!has(key)) set_bool(key, def);
    return get_bool(key);
}

std::string Config::get_or(const std::string &key, const std::string &def) {
    if (!has(key)) set_string(key, def);
    return get_string(key);
}

void Config::set_double(const std::string &key, double value) { values_[key] = format_double(value); }
void Config::set_int(const std::string &key, std::int64_t value) { values_[key] = std::to_string(value); }
void Config::set_bool(const std::string &key, bool value) { values_[key] = value ? "true" : "false"; }
void Config::set_string(const std::string &key, const std::string &value) { values_[key] = value; }

void Config::apply_override(const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like section.key=value: '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.empty() || key.find('.') == std::string::npos)
        throw ConfigError("override key must be section.key: '" + assignment + "'");
    values_[key] = value;
}

std::string Config::serialize() const {
    std::ostringstream out;
    std::string section;
    bool first = true;
    for (const auto &[key, value] : values_) {
        const auto dot = key.rfind('.');
        const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (sec != section || first) {
            if (!first) out << "\n";
            out << "[" << sec << "]\n";
            section = sec;
            first = false;
        }
        out << name << " = " << value << "\n";
    }
    return out.str();
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto &[key, _] : values_) out.push_back(key);
    return out;
}

}  // namespace dsoar
