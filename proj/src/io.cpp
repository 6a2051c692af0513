#include "cfront/io.hpp"

#include "cfront/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cfront {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

/// JSON has no non-finite numbers; they are stored as strings.
nlohmann::json number(double x) {
    if (std::isfinite(x)) return x;
    return format_real(x);
}

double from_number(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    return std::nan("");
}

}  // namespace

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(const fs::path& path, const nlohmann::json& header, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw UsageError("write_csv: names and columns differ in count");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw UsageError("write_csv: ragged columns");
    auto out = open_out(path);
    out << "# " << header.dump() << '\n';
    for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_real(columns[k][i]);
        out << '\n';
    }
}

void write_columns(const fs::path& path, const std::vector<std::string>& comments,
                   const std::vector<std::vector<double>>& columns) {
    auto out = open_out(path);
    for (const auto& c : comments) out << "# " << c << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? " " : "") << format_real(columns[k][i]);
        out << '\n';
    }
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

void write_json(const fs::path& path, const nlohmann::json& value) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        auto out = open_out(tmp);
        out << value.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

nlohmann::json read_csv_header(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    if (!in || !std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw std::runtime_error("no JSON header in " + path.string());
    return nlohmann::json::parse(line.substr(2));
}

bool RunManifest::all_gates_pass() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& x : gates)
        g.push_back({{"criterion", x.criterion},
                     {"name", x.name},
                     {"pass", x.pass},
                     {"value", number(x.value)},
                     {"limit", number(x.limit)},
                     {"detail", x.detail}});
    return {{"command", command},       {"version", version},     {"status", status},
            {"error", error},           {"error_type", error_type}, {"wall_clock_seconds", wall_clock},
            {"config", config},         {"outputs", outputs},     {"max_residuals", max_residuals},
            {"gates", g}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.version = j.value("version", "");
    m.status = j.value("status", "");
    m.error = j.value("error", "");
    m.error_type = j.value("error_type", "");
    m.wall_clock = j.value("wall_clock_seconds", 0.0);
    m.config = j.value("config", nlohmann::json::object());
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.max_residuals = j.value("max_residuals", nlohmann::json::object());
    for (const auto& g : j.value("gates", nlohmann::json::array()))
        m.gates.push_back({g.at("criterion").get<int>(), g.at("name").get<std::string>(), g.at("pass").get<bool>(),
                           from_number(g.at("value")), from_number(g.at("limit")), g.value("detail", "")});
    return m;
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
    for (const auto& f : manifest.outputs)
        if (!fs::exists(dir / f)) throw std::runtime_error("manifest lists missing output " + f);
    write_json(dir / kManifestName, manifest.to_json());
}

}  // namespace cfront
