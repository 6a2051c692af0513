#pragma once

/// @file config.hpp
/// @brief Flat key=value run configuration with dotted namespaces
/// (model.epsilon, scheme.safety, pert.amplitude) and a per-command schema.

#include "cfront/errors.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cfront {

/// Rejected configuration: unknown key, malformed line or invalid value.
class ConfigError : public UsageError {
public:
    using UsageError::UsageError;
};

/// Raw key/value pairs in file order of precedence; later assignments win.
class Config {
public:
    /// One assignment per line, `#` starts a comment, blank lines ignored.
    /// A key repeated within one source is rejected.
    static Config parse(std::istream& in, const std::string& source = "<input>");
    static Config load(const std::filesystem::path& path);

    /// Applies `key=value` on top of the current values.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

enum class ValueKind { Real, Integer, Boolean, Text, RealList, TextList, Choice };

struct KeySpec {
    std::string key;
    ValueKind kind;
    std::string default_value;
    std::string help;
    std::vector<std::string> choices;  ///< Choice only
};

using Schema = std::vector<KeySpec>;

/// Every schema key with its validated value (file, override or default).
class ResolvedConfig {
public:
    /// Throws ConfigError for keys outside the schema and for values that do
    /// not parse as their declared kind.
    static ResolvedConfig resolve(const Config& raw, const Schema& schema);

    double real(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<std::string> texts(const std::string& key) const;

    /// Values as strings, in key order.
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    const std::string& raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

/// Strict numeric parsing used by the resolver; throws ConfigError naming `key`.
double parse_real(const std::string& text, const std::string& key);
long parse_integer(const std::string& text, const std::string& key);
bool parse_bool(const std::string& text, const std::string& key);
std::vector<std::string> split_list(const std::string& text);

}  // namespace cfront
