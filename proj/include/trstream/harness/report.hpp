#pragma once

#include <trstream/harness/protocol.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace trstream::harness {

inline constexpr std::string_view kReportVersion = "trstream 0.1.0";
inline constexpr std::string_view kCsvHeader = "algorithm,repetition,step,relative_error,step_seconds,cumulative_seconds";

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_format(std::string_view s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw config_error("format must be csv or json, got '" + std::string(s) + "'");
}

namespace detail {

// Shortest representation that reads back to the same double.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

} // namespace detail

inline void write_csv(const ExperimentReport& rep, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const ReportRow& r : rep.rows)
        out << r.algorithm << ',' << r.repetition << ',' << r.step << ',' << detail::fmt_double(r.relative_error) << ','
            << detail::fmt_double(r.step_seconds) << ',' << detail::fmt_double(r.cumulative_seconds) << '\n';
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
    using nlohmann::json;
    const ProtocolConfig& c = rep.config;
    json algos = json::array();
    for (Algorithm a : c.algorithms) algos.push_back(std::string(algorithm_name(a)));
    json j;
    j["metadata"] = {{"version", kReportVersion},
                     {"source", rep.source},
                     {"shape", rep.shape},
                     {"init_length", rep.init_length},
                     {"steps", rep.steps},
                     {"config",
                      {{"algorithms", algos},
                       {"rank", c.rank},
                       {"sketch_size", c.sketch_size},
                       {"t_new", c.t_new},
                       {"init_fraction", c.init_fraction},
                       {"tol", c.tol},
                       {"max_iters", c.max_iters},
                       {"init_tol", c.init_tol},
                       {"init_max_iters", c.init_max_iters},
                       {"repetitions", c.repetitions},
                       {"seed", c.seed}}}};
    json rows = json::array();
    for (const ReportRow& r : rep.rows)
        rows.push_back({{"algorithm", r.algorithm},
                        {"repetition", r.repetition},
                        {"step", r.step},
                        {"relative_error", r.relative_error},
                        {"step_seconds", r.step_seconds},
                        {"cumulative_seconds", r.cumulative_seconds}});
    j["rows"] = std::move(rows);
    json summary = json::array();
    for (const SummaryRow& s : rep.summary)
        summary.push_back({{"algorithm", s.algorithm},
                           {"step", s.step},
                           {"mean_relative_error", s.mean_relative_error},
                           {"mean_step_seconds", s.mean_step_seconds},
                           {"mean_cumulative_seconds", s.mean_cumulative_seconds}});
    j["summary"] = std::move(summary);
    return j;
}

inline std::vector<ReportRow> rows_from_json(const nlohmann::json& j) {
    std::vector<ReportRow> rows;
    for (const auto& r : j.at("rows"))
        rows.push_back({r.at("algorithm").get<std::string>(), r.at("repetition").get<std::size_t>(),
                        r.at("step").get<std::size_t>(), r.at("relative_error").get<double>(),
                        r.at("step_seconds").get<double>(), r.at("cumulative_seconds").get<double>()});
    return rows;
}

inline void write_report(const ExperimentReport& rep, const std::string& path, ReportFormat format) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    if (format == ReportFormat::Csv)
        write_csv(rep, out);
    else
        out << to_json(rep).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed on " + path);
}

} // namespace trstream::harness
