#pragma once

// Run settings from a flat key=value file ('#' starts a comment). Keys match
// the CLI flag names without the leading dashes.

#include <trstream/harness/protocol.hpp>
#include <trstream/harness/report.hpp>
#include <trstream/harness/synthetic.hpp>

#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

namespace trstream::harness {

struct RunSettings {
    ProtocolConfig protocol;
    std::string input;                    // TRT1 path
    std::optional<SyntheticSpec> synthetic;
    std::string out = "report.csv";
    ReportFormat format = ReportFormat::Csv;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s, std::string_view key) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
        throw config_error(std::string(key) + ": expected a number, got '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view key) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
        throw config_error(std::string(key) + ": expected a nonnegative integer, got '" + std::string(s) + "'");
    return v;
}

} // namespace detail

inline void apply_setting(RunSettings& rs, std::string_view key, std::string_view value) {
    using detail::parse_double;
    using detail::parse_u64;
    ProtocolConfig& p = rs.protocol;
    value = detail::trim(value);
    if (key == "algo") {
        p.algorithms.clear();
        while (!value.empty()) {
            const auto c = value.find(',');
            p.algorithms.push_back(parse_algorithm(detail::trim(value.substr(0, c))));
            if (c == std::string_view::npos) break;
            value.remove_prefix(c + 1);
        }
    } else if (key == "rank") {
        p.rank = parse_positive(value, key);
    } else if (key == "sketch-size") {
        p.sketch_size = parse_positive(value, key);
    } else if (key == "t-new") {
        p.t_new = parse_positive(value, key);
    } else if (key == "init-fraction") {
        p.init_fraction = parse_double(value, key);
    } else if (key == "tol") {
        p.tol = parse_double(value, key);
    } else if (key == "max-iters") {
        p.max_iters = parse_positive(value, key);
    } else if (key == "init-tol") {
        p.init_tol = parse_double(value, key);
    } else if (key == "init-max-iters") {
        p.init_max_iters = parse_positive(value, key);
    } else if (key == "seed") {
        p.seed = parse_u64(value, key);
    } else if (key == "reps") {
        p.repetitions = parse_positive(value, key);
    } else if (key == "input") {
        rs.input = std::string(value);
    } else if (key == "synthetic") {
        rs.synthetic = parse_synthetic_spec(value);
    } else if (key == "out") {
        rs.out = std::string(value);
    } else if (key == "format") {
        rs.format = parse_format(value);
    } else {
        throw config_error("unknown setting '" + std::string(key) + "'");
    }
}

inline void load_config_file(RunSettings& rs, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            apply_setting(rs, detail::trim(s.substr(0, eq)), s.substr(eq + 1));
        } catch (const config_error& e) {
            throw config_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

/// Final consistency checks once file and flags are merged.
inline void validate(const RunSettings& rs) {
    rs.protocol.validate();
    if (rs.input.empty() == !rs.synthetic.has_value())
        throw config_error("exactly one of input and synthetic must be given");
}

} // namespace trstream::harness
