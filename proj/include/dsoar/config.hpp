#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsoar {

/// Raised for malformed files, missing keys and bad values. The CLI maps it
/// to its configuration exit code.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat sectioned key-value configuration ("[section]" headers, "key = value"
/// lines, '#' comments). Keys carry their unit as a suffix (e.g. w0x_mps).
///
/// Readers use get_or(): a missing key is materialized with its default, so
/// serialize() after a run yields the fully resolved snapshot that makes the
/// run reproducible.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string &path);
    static Config from_string(const std::string &text);

    bool has(const std::string &key) const { return values_.count(key) > 0; }

    double get_double(const std::string &key) const;
    std::int64_t get_int(const std::string &key) const;
    bool get_bool(const std::string &key) const;
    std::string get_string(const std::string &key) const;

    double get_or(const std::string &key, double def);
    std::int64_t get_or(const std::string &key, std::int64_t def);
    bool get_or(const std::string &key, bool def);
    std::string get_or(const std::string &key, const std::string &def);

    void set_double(const std::string &key, double value);
    void set_int(const std::string &key, std::int64_t value);
    void set_bool(const std::string &key, bool value);
    void set_string(const std::string &key, const std::string &value);

    /// Apply "section.key=value" override strings (CLI flags beat file keys).
    void apply_override(const std::string &assignment);

    /// Deterministic text form (sections and keys sorted).
    std::string serialize() const;

    std::vector<std::string> keys() const;

  private:
    const std::string &raw(const std::string &key) const;

    std::map<std::string, std::string> values_;  // "section.key" -> text
};

}  // namespace dsoar
