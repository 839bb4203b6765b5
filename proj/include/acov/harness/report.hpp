#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "acov/error.hpp"
#include "acov/harness/config.hpp"

namespace acov::harness {

inline constexpr const char* kSoftwareVersion = "0.1.0";

struct Provenance {
    std::uint64_t master_seed = 0;
    std::string software_version = kSoftwareVersion;
    double wall_time_seconds = 0.0;
    unsigned workers = 1;
    bool operator==(const Provenance&) const = default;
};

/// Full result of one experiment. `cells` hold one flat record per grid cell
/// with keys in `columns` order; `summary` holds fits and other derived values.
struct ExperimentReport {
    std::string kind;
    json config;
    json constants;
    std::vector<std::string> columns;
    std::vector<ordered_json> cells;
    ordered_json summary = ordered_json::object();
    std::map<std::string, bool> pass_flags;
    Provenance provenance;

    bool all_pass() const {
        for (const auto& [name, ok] : pass_flags) {
            if (!ok) return false;
        }
        return true;
    }

    bool operator==(const ExperimentReport&) const = default;
};

/// Non-finite values are stored as null so JSON round-trips are exact.
inline ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

inline ordered_json report_to_json(const ExperimentReport& r) {
    ordered_json j;
    j["kind"] = r.kind;
    j["config"] = ordered_json::parse(r.config.dump());
    j["constants"] = ordered_json::parse(r.constants.dump());
    j["columns"] = r.columns;
    j["cells"] = ordered_json::array();
    for (const auto& c : r.cells) j["cells"].push_back(c);
    j["summary"] = r.summary;
    j["pass_flags"] = ordered_json::object();
    for (const auto& [name, ok] : r.pass_flags) j["pass_flags"][name] = ok;
    j["all_pass"] = r.all_pass();
    j["provenance"] = {{"master_seed", r.provenance.master_seed},
                       {"software_version", r.provenance.software_version},
                       {"wall_time_seconds", r.provenance.wall_time_seconds},
                       {"workers", r.provenance.workers}};
    return j;
}

inline ExperimentReport report_from_json(const ordered_json& j) {
    try {
        ExperimentReport r;
        r.kind = j.at("kind").get<std::string>();
        r.config = json::parse(j.at("config").dump());
        r.constants = json::parse(j.at("constants").dump());
        r.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& c : j.at("cells")) r.cells.push_back(c);
        r.summary = j.at("summary");
        for (const auto& [name, ok] : j.at("pass_flags").items()) r.pass_flags[name] = ok.get<bool>();
        const auto& p = j.at("provenance");
        r.provenance.master_seed = p.at("master_seed").get<std::uint64_t>();
        r.provenance.software_version = p.at("software_version").get<std::string>();
        r.provenance.wall_time_seconds = p.at("wall_time_seconds").get<double>();
        r.provenance.workers = p.at("workers").get<unsigned>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("report_from_json: ") + e.what());
    }
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const ordered_json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return format_number(v.get<double>());
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        return quoted + "\"";
    }
    return s;
}

/// Header plus one row per cell, in column order.
inline std::string cells_to_csv(const ExperimentReport& r) {
    std::string out;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        if (i) out += ',';
        out += r.columns[i];
    }
    out += '\n';
    for (const auto& cell : r.cells) {
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            if (i) out += ',';
            auto it = cell.find(r.columns[i]);
            if (it != cell.end()) out += csv_field(*it);
        }
        out += '\n';
    }
    return out;
}

struct ReportManifest {
    std::filesystem::path summary_json;
    std::filesystem::path cells_csv;
};

/// Writes <dir>/<kind>.json and <dir>/<kind>.csv.
inline ReportManifest write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw PersistenceError("cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = r.kind.empty() ? "report" : r.kind;
    ReportManifest manifest{dir / (stem + ".json"), dir / (stem + ".csv")};

    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw PersistenceError("cannot open " + path.string() + " for writing");
        os << text;
        os.flush();
        if (!os) throw PersistenceError("write failed for " + path.string());
    };
    write(manifest.summary_json, report_to_json(r).dump(2) + "\n");
    write(manifest.cells_csv, cells_to_csv(r));
    return manifest;
}

}  // namespace acov::harness
