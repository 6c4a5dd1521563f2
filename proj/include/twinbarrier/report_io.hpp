#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twinbarrier/scenario.hpp"
#include "twinbarrier/version.hpp"

namespace twinbarrier {

namespace detail {

/// 17 significant digits: every double round-trips bit-exactly through the
/// CSV files.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void atomic_write(const std::filesystem::path& target, const std::string& content) {
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

inline std::string csv_content(const Table& t) {
    std::ostringstream out;
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            out << (c ? "," : "") << format_number(t.data[c][r]);
        out << "\n";
    }
    return out.str();
}

inline std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

}  // namespace detail

inline Json summary_json(const ScenarioReport& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["experiment"] = to_string(report.experiment);
    if (report.config.seed) j["seed"] = *report.config.seed;
    j["config"] = to_json(report.config);
    Json metrics = Json::object();
    for (const auto& [name, metric] : report.metrics)
        metrics[name] = {{"value", metric.value}, {"provenance", metric.provenance}};
    j["metrics"] = metrics;
    Json checks = Json::object();
    for (const auto& [name, ok] : report.checks) checks[name] = ok;
    j["checks"] = checks;
    Json tables = Json::array();
    for (const auto& t : report.tables) tables.push_back(t.name);
    j["tables"] = tables;
    return j;
}

/// Writes one CSV per table plus summary.json into out_dir (created if
/// missing).  Files are staged and renamed so readers never see partial
/// content.  Everything except the summary's timestamp field is a pure
/// function of the configuration.
inline std::vector<std::filesystem::path> emit_report(const ScenarioReport& report,
                                                      const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw IoError("cannot create output directory " + out_dir.string());

    std::vector<std::filesystem::path> written;
    for (const auto& t : report.tables) {
        const auto path = out_dir / (t.name + ".csv");
        detail::atomic_write(path, detail::csv_content(t));
        written.push_back(path);
    }

    Json summary = summary_json(report);
    summary["timestamp"] = detail::iso8601_utc_now();
    const auto path = out_dir / "summary.json";
    detail::atomic_write(path, summary.dump(2) + "\n");
    written.push_back(path);
    return written;
}

/// Reads back a CSV written by emit_report.
inline Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV " + path.string());

    Table t{path.stem().string()};
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) t.columns.push_back(cell);
    t.data.resize(t.columns.size());

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::size_t c = 0;
        while (std::getline(row, cell, ',')) {
            if (c >= t.columns.size())
                throw ParseError("row wider than header in " + path.string());
            t.data[c++].push_back(std::stod(cell));
        }
        if (c != t.columns.size())
            throw ParseError("row narrower than header in " + path.string());
    }
    return t;
}

inline Json read_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ParseError("summary " + path.string() + " is not valid JSON: " + e.what());
    }
    return j;
}

}  // namespace twinbarrier
