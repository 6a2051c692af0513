#pragma once

/// @file io.hpp
/// @brief CSV tables with a JSON header line, and the run manifest that
/// closes every command's output directory.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cfront {

/// `%.17g`; "nan" / "inf" / "-inf" for non-finite values.
std::string format_real(double x);

/// First line `# <header JSON>`, then a comma separated column header and
/// one row per index. All columns must have equal length.
void write_csv(const std::filesystem::path& path, const nlohmann::json& header,
               const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns);

/// Whitespace separated columns preceded by `# ` comment lines (gnuplot data).
void write_columns(const std::filesystem::path& path, const std::vector<std::string>& comments,
                   const std::vector<std::vector<double>>& columns);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Pretty JSON; written to a temporary name first and renamed into place.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// Reads the JSON header line of a file written by write_csv.
nlohmann::json read_csv_header(const std::filesystem::path& path);

struct Gate {
    int criterion = 0;  ///< acceptance criterion number, 0 when the gate is command-local
    std::string name;
    bool pass = false;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct RunManifest {
    std::string command;
    std::string version;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> outputs;  ///< relative to the manifest directory
    double wall_clock = 0.0;           ///< seconds
    nlohmann::json max_residuals = nlohmann::json::object();
    std::vector<Gate> gates;
    std::string status;      ///< pass, fail, error or rejected
    std::string error;
    std::string error_type;  ///< exception class of a failed run

    bool all_gates_pass() const;
    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestName = "manifest.json";

/// Writes `dir/manifest.json` last: every listed output must already exist.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace cfront
