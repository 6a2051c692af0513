#include "cfront/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

namespace cfront {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    return std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    });
}

std::pair<std::string, std::string> split_assignment(const std::string& line, const std::string& where) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    return {key, value};
}

void check_kind(const KeySpec& spec, const std::string& value) {
    switch (spec.kind) {
        case ValueKind::Real: parse_real(value, spec.key); break;
        case ValueKind::Integer: parse_integer(value, spec.key); break;
        case ValueKind::Boolean: parse_bool(value, spec.key); break;
        case ValueKind::Text: break;
        case ValueKind::RealList:
            if (split_list(value).empty()) throw ConfigError(spec.key + ": empty list");
            for (const auto& item : split_list(value)) parse_real(item, spec.key);
            break;
        case ValueKind::TextList:
            if (split_list(value).empty()) throw ConfigError(spec.key + ": empty list");
            break;
        case ValueKind::Choice:
            if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
                std::string all;
                for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
                throw ConfigError(spec.key + ": '" + value + "' is not one of {" + all + "}");
            }
            break;
    }
}

}  // namespace

double parse_real(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError(key + ": '" + text + "' is not a finite number");
    return v;
}

long parse_integer(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    long v = 0;
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + text + "' is not an integer");
    return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": '" + text + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    std::set<std::string> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(number);
        auto [key, value] = split_assignment(line, where);
        if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

void Config::set(const std::string& assignment) {
    auto [key, value] = split_assignment(assignment, "--set");
    values_[key] = value;
}

void Config::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
    values_[key] = value;
}

ResolvedConfig ResolvedConfig::resolve(const Config& raw, const Schema& schema) {
    ResolvedConfig out;
    for (const auto& [key, value] : raw.values()) {
        if (std::none_of(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.key == key; }))
            throw ConfigError("unknown config key '" + key + "'");
    }
    for (const auto& spec : schema) {
        const auto it = raw.values().find(spec.key);
        const std::string value = it == raw.values().end() ? spec.default_value : it->second;
        check_kind(spec, value);
        out.values_[spec.key] = value;
    }
    return out;
}

const std::string& ResolvedConfig::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("config key '" + key + "' is not part of the schema");
    return it->second;
}

double ResolvedConfig::real(const std::string& key) const { return parse_real(raw(key), key); }
long ResolvedConfig::integer(const std::string& key) const { return parse_integer(raw(key), key); }
bool ResolvedConfig::flag(const std::string& key) const { return parse_bool(raw(key), key); }
const std::string& ResolvedConfig::text(const std::string& key) const { return raw(key); }

std::vector<double> ResolvedConfig::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_real(item, key));
    return out;
}

std::vector<std::string> ResolvedConfig::texts(const std::string& key) const { return split_list(raw(key)); }

}  // namespace cfront
